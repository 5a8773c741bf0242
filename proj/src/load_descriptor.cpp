#include "loadtex/load_descriptor.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "loadtex/error.hpp"

namespace loadtex {

namespace {

inline double lerp2(const float* q, std::ptrdiff_t stride, double fx, double fy) {
  const double v00 = q[0];
  const double v10 = q[1];
  const double v01 = q[stride];
  const double v11 = q[stride + 1];
  const double top = v00 + fx * (v10 - v00);
  const double bottom = v01 + fx * (v11 - v01);
  return top + fy * (bottom - top);
}

bool is_lattice(Point p) {
  return p.x == std::floor(p.x) && p.y == std::floor(p.y);
}

}  // namespace

void LoadConfig::validate() const {
  if (scales.empty()) throw Error(Errc::ConfigError, "at least one scale is required");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || !std::isfinite(scales[i])) {
      throw Error(Errc::ConfigError, "scales must be positive");
    }
    if (i > 0 && !(scales[i] > scales[i - 1])) {
      throw Error(Errc::ConfigError, "scales must be strictly increasing");
    }
  }
  if (!(patch_radius >= scales.back()) || !std::isfinite(patch_radius)) {
    throw Error(Errc::ConfigError, "patch_radius must be >= the largest scale");
  }
  if (neighbors != 8) throw Error(Errc::ConfigError, "LOAD uses exactly 8 neighbors");
  if (magnitude_radius != 1.0) throw Error(Errc::ConfigError, "magnitude radius is fixed at 1");
}

int LoadConfig::margin() const {
  return static_cast<int>(std::ceil(patch_radius + scales.back())) + 1;
}

double acs_theta(Point origin, Point a) {
  if (origin == a) {
    throw Error(Errc::DegenerateInput, "orientation undefined at the patch centre");
  }
  return std::atan2(a.y - origin.y, a.x - origin.x);
}

AcsFrame make_frame(Point origin, Point a) { return AcsFrame{acs_theta(origin, a), a}; }

Point ring_offset(double theta, double radius, int p, int neighbors) {
  const double angle = 2.0 * std::numbers::pi * p / neighbors - theta;
  return Point{snap_to_lattice(radius * std::cos(angle)),
               snap_to_lattice(-radius * std::sin(angle))};
}

std::uint8_t load_code(const GrayImage& img, const AcsFrame& frame, double radius) {
  const double center = sample_bilinear(img, frame.center.x, frame.center.y);
  std::uint8_t code = 0;
  for (int p = 0; p < 8; ++p) {
    const Point d = ring_offset(frame.theta, radius, p);
    const double v = sample_bilinear(img, frame.center.x + d.x, frame.center.y + d.y);
    code |= static_cast<std::uint8_t>(compare_threshold(v, center) << p);
  }
  return code;
}

double adaptive_magnitude(const GrayImage& img, const AcsFrame& frame) {
  double v[8];
  for (int p = 0; p < 8; p += 2) {
    const Point d = ring_offset(frame.theta, 1.0, p);
    v[p] = sample_bilinear(img, frame.center.x + d.x, frame.center.y + d.y);
  }
  const double gx = v[4] - v[0];
  const double gy = v[6] - v[2];
  return std::sqrt(gx * gx + gy * gy);
}

std::vector<double> root_normalize(std::span<const double> h) {
  double total = 0.0;
  for (double v : h) {
    if (v < 0.0) throw Error(Errc::NegativeEntry, "histogram entry " + std::to_string(v));
    total += v;
  }
  std::vector<double> out(h.begin(), h.end());
  if (total == 0.0) return out;
  for (double& v : out) v = std::sqrt(v / total);
  return out;
}

LoadExtractor::LoadExtractor(LoadConfig cfg, const UniformTable& table)
    : cfg_(std::move(cfg)), table_(&table) {
  cfg_.validate();
  margin_ = cfg_.margin();
  const int reach = static_cast<int>(std::floor(cfg_.patch_radius));
  const double r2 = cfg_.patch_radius * cfg_.patch_radius;
  const Point origin{0.0, 0.0};

  auto add_tap = [this](Point d) {
    const double fx0 = std::floor(d.x);
    const double fy0 = std::floor(d.y);
    taps_.push_back(Tap{static_cast<int>(fx0), static_cast<int>(fy0), d.x - fx0, d.y - fy0});
  };

  for (int j = -reach; j <= reach; ++j) {
    for (int i = -reach; i <= reach; ++i) {
      if (i == 0 && j == 0) continue;
      if (static_cast<double>(i) * i + static_cast<double>(j) * j > r2) continue;
      points_.emplace_back(i, j);
      const Point a{static_cast<double>(i), static_cast<double>(j)};
      const double theta = cfg_.adaptive ? acs_theta(origin, a) : 0.0;
      for (int p = 0; p < 8; p += 2) {
        add_tap(ring_offset(theta, cfg_.magnitude_radius, p));
      }
      for (double s : cfg_.scales) {
        for (int p = 0; p < 8; ++p) {
          add_tap(ring_offset(theta, s, p));
        }
      }
    }
  }
  if (points_.size() < 8) {
    throw Error(Errc::DegenerateInput, "patch radius " + std::to_string(cfg_.patch_radius) +
                                           " yields fewer than 8 contributing points");
  }
}

std::vector<LoadExtractor::BoundTap> LoadExtractor::bind(int width) const {
  std::vector<BoundTap> bound;
  bound.reserve(taps_.size());
  for (const Tap& t : taps_) {
    bound.push_back(BoundTap{static_cast<std::ptrdiff_t>(t.dy) * width + t.dx, t.fx, t.fy});
  }
  return bound;
}

void LoadExtractor::check_origin(const GrayImage& img, Point origin) const {
  if (!is_lattice(origin)) {
    throw Error(Errc::DegenerateInput, "reference point must lie on the pixel lattice");
  }
  if (origin.x < margin_ || origin.y < margin_ || origin.x > img.width() - 1 - margin_ ||
      origin.y > img.height() - 1 - margin_) {
    throw Error(Errc::OutOfBounds, "reference point (" + std::to_string(origin.x) + ", " +
                                       std::to_string(origin.y) + ") closer than " +
                                       std::to_string(margin_) + " px to the border");
  }
}

void LoadExtractor::accumulate(const GrayImage& img, std::span<const BoundTap> taps,
                               Point origin, std::span<double> hist) const {
  const std::ptrdiff_t stride = img.width();
  const float* base = img.data() + static_cast<std::ptrdiff_t>(origin.y) * stride +
                      static_cast<std::ptrdiff_t>(origin.x);
  const std::size_t scales = cfg_.scales.size();
  const std::size_t taps_per_point = 4 + 8 * scales;
  const auto& map = table_->map();

  for (std::size_t k = 0; k < points_.size(); ++k) {
    const auto [i, j] = points_[k];
    const float* a = base + static_cast<std::ptrdiff_t>(j) * stride + i;
    const BoundTap* t = taps.data() + k * taps_per_point;

    double ring[4];
    for (int q = 0; q < 4; ++q) {
      ring[q] = lerp2(a + t[q].offset, stride, t[q].fx, t[q].fy);
    }
    // ring[] holds A0, A2, A4, A6.
    const double gx = ring[2] - ring[0];
    const double gy = ring[3] - ring[1];
    const double magnitude = std::sqrt(gx * gx + gy * gy);
    if (magnitude == 0.0) continue;  // adds nothing at any scale
    t += 4;

    const double center = *a;
    for (std::size_t s = 0; s < scales; ++s) {
      unsigned code = 0;
      for (int p = 0; p < 8; ++p, ++t) {
        const double v = lerp2(a + t->offset, stride, t->fx, t->fy);
        code |= static_cast<unsigned>(compare_threshold(v, center)) << p;
      }
      hist[s * kUniformBins + map[code]] += magnitude;
    }
  }
}

std::vector<double> LoadExtractor::histogram(const GrayImage& img, Point origin) const {
  check_origin(img, origin);
  const auto taps = bind(img.width());
  std::vector<double> hist(cfg_.dimension(), 0.0);
  accumulate(img, taps, origin, hist);
  return hist;
}

LoadDescriptor LoadExtractor::extract(const GrayImage& img, Point origin) const {
  const auto normalized = root_normalize(histogram(img, origin));
  LoadDescriptor d;
  d.scale_count = cfg_.scales.size();
  d.values.assign(normalized.begin(), normalized.end());
  return d;
}

void LoadExtractor::extract_points(const GrayImage& img, std::span<const Point> origins,
                                   DescriptorSet& out) const {
  if (out.dimension == 0 && out.empty()) out.dimension = cfg_.dimension();
  if (out.dimension != cfg_.dimension()) {
    throw Error(Errc::DimensionMismatch, "descriptor set dimension differs from config");
  }
  for (const Point& o : origins) check_origin(img, o);
  const auto taps = bind(img.width());
  std::vector<double> hist(cfg_.dimension());
  const std::size_t first = out.values.size();
  out.values.resize(first + origins.size() * cfg_.dimension());
  float* dst = out.values.data() + first;
  for (const Point& o : origins) {
    std::fill(hist.begin(), hist.end(), 0.0);
    accumulate(img, taps, o, hist);
    double total = 0.0;
    for (double v : hist) total += v;
    for (double v : hist) *dst++ = total == 0.0 ? 0.0f : static_cast<float>(std::sqrt(v / total));
  }
}

LoadDescriptor extract(const GrayImage& img, Point origin, const LoadConfig& cfg,
                       const UniformTable& table) {
  return LoadExtractor(cfg, table).extract(img, origin);
}

std::vector<double> default_pyramid_factors() {
  std::vector<double> factors;
  for (int i = -1; i <= 4; ++i) factors.push_back(std::pow(2.0, -i / 2.0));
  return factors;
}

DescriptorSet extract_dense(const GrayImage& img, const LoadExtractor& extractor, int step,
                            std::span<const double> pyramid_factors) {
  if (step < 1) throw Error(Errc::ConfigError, "grid step must be >= 1");
  const int margin = extractor.config().margin();
  DescriptorSet out(extractor.config().dimension());
  std::vector<double> skipped;
  // Canonical intensity range first, so rounding in the resampled levels
  // cannot differ between affinely related inputs.
  const GrayImage base = normalize_range(img);
  for (double factor : pyramid_factors) {
    const int w = static_cast<int>(std::lround(img.width() * factor));
    const int h = static_cast<int>(std::lround(img.height() * factor));
    if (grid_count(w, step, margin) == 0 || grid_count(h, step, margin) == 0) {
      skipped.push_back(factor);
      continue;
    }
    const GrayImage level = rescale(base, factor, margin);
    const SampleGrid grid = dense_grid(level, step, margin);
    extractor.extract_points(level, grid.points, out);
  }
  if (out.empty()) {
    throw Error(Errc::DegenerateOutput, "no pyramid level of a " + std::to_string(img.width()) +
                                            "x" + std::to_string(img.height()) +
                                            " image admits a grid point");
  }
  if (!skipped.empty()) {
    spdlog::warn("{}x{} image: skipped {} pyramid level(s) too small for margin {}", img.width(),
                 img.height(), skipped.size(), margin);
  }
  return out;
}

DescriptorSet extract_dense(const GrayImage& img, const LoadConfig& cfg, int step,
                            std::span<const double> pyramid_factors) {
  return extract_dense(img, LoadExtractor(cfg), step, pyramid_factors);
}

}  // namespace loadtex
