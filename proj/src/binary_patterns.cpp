#include "loadtex/binary_patterns.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "loadtex/error.hpp"

namespace loadtex {

int transitions(std::uint8_t pattern) noexcept {
  const auto rotated = static_cast<std::uint8_t>((pattern >> 1) | (pattern << 7));
  return std::popcount(static_cast<std::uint8_t>(pattern ^ rotated));
}

UniformTable::UniformTable() {
  int next = 0;
  for (int code = 0; code < 256; ++code) {
    const auto pattern = static_cast<std::uint8_t>(code);
    map_[code] = static_cast<std::uint8_t>(transitions(pattern) <= 2 ? next++ : kNonUniformBin);
  }
}

const UniformTable& uniform_table() {
  static const UniformTable table;
  return table;
}

void PatternConfig::validate() const {
  if (neighbors < 4 || neighbors > 24) {
    throw Error(Errc::ConfigError, "neighbors must lie in [4, 24], got " + std::to_string(neighbors));
  }
  if (!(radius > 0.0)) {
    throw Error(Errc::ConfigError, "radius must be positive");
  }
}

double snap_to_lattice(double v) noexcept {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

std::uint32_t lbp_code(const GrayImage& img, Point center, const PatternConfig& cfg) {
  cfg.validate();
  const double gc = sample_bilinear(img, center.x, center.y);
  std::uint32_t code = 0;
  for (int p = 0; p < cfg.neighbors; ++p) {
    const double angle = 2.0 * std::numbers::pi * p / cfg.neighbors;
    const double x = center.x + snap_to_lattice(cfg.radius * std::cos(angle));
    const double y = center.y - snap_to_lattice(cfg.radius * std::sin(angle));
    const double gp = sample_bilinear(img, x, y);
    code |= static_cast<std::uint32_t>(compare_threshold(gp, gc)) << p;
  }
  return code;
}

std::vector<double> lbp_histogram(const GrayImage& img, const PatternConfig& cfg,
                                  const UniformTable& table) {
  cfg.validate();
  if (cfg.neighbors != 8) {
    throw Error(Errc::ConfigError, "uniform histogram requires 8 neighbors");
  }
  const int border = static_cast<int>(std::ceil(cfg.radius));
  if (img.width() <= 2 * border || img.height() <= 2 * border) {
    throw Error(Errc::DegenerateOutput, "image too small for LBP radius");
  }
  std::vector<double> hist(kUniformBins, 0.0);
  std::size_t total = 0;
  for (int y = border; y < img.height() - border; ++y) {
    for (int x = border; x < img.width() - border; ++x) {
      const auto code = lbp_code(img, Point{static_cast<double>(x), static_cast<double>(y)}, cfg);
      hist[table.bin(static_cast<std::uint8_t>(code))] += 1.0;
      ++total;
    }
  }
  for (double& h : hist) h /= static_cast<double>(total);
  return hist;
}

}  // namespace loadtex
