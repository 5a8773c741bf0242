#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "loadtex/image.hpp"

namespace loadtex {

inline constexpr int kUniformBins = 59;
inline constexpr int kNonUniformBin = 58;

/// 1 for t >= 0, else 0.
constexpr int sign_threshold(double t) noexcept { return t >= 0.0 ? 1 : 0; }

/// sign_threshold(v - c) for interpolated samples: a difference within
/// rounding of zero (relative 1e-12) counts as a tie, so that exact ties in
/// real arithmetic do not depend on the intensity scale.
constexpr int compare_threshold(double v, double c) noexcept {
  const double scale = (v < 0.0 ? -v : v) + (c < 0.0 ? -c : c);
  return v - c >= -1e-12 * scale ? 1 : 0;
}

/// Circular bit-change count of an 8-bit code (bit 7 wraps to bit 0).
int transitions(std::uint8_t pattern) noexcept;

/// Maps the 256 eight-bit codes to 59 bins: the 58 uniform codes (at most two
/// circular transitions) take bins 0..57 in ascending code order, every other
/// code maps to bin 58.
class UniformTable {
 public:
  UniformTable();

  int bin(std::uint8_t pattern) const noexcept { return map_[pattern]; }
  const std::array<std::uint8_t, 256>& map() const noexcept { return map_; }

 private:
  std::array<std::uint8_t, 256> map_{};
};

/// Process-wide immutable table.
const UniformTable& uniform_table();

inline int uniform_index(std::uint8_t pattern, const UniformTable& table) noexcept {
  return table.bin(pattern);
}

struct PatternConfig {
  int neighbors = 8;
  double radius = 1.0;

  /// ConfigError unless 4 <= neighbors <= 24 and radius > 0.
  void validate() const;
};

/// Classic LBP code: neighbour p sits at image-frame angle 2*pi*p/P,
/// (x + R cos, y - R sin), read bilinearly. Throws OutOfBounds if any neighbour
/// falls outside the image.
std::uint32_t lbp_code(const GrayImage& img, Point center, const PatternConfig& cfg);

/// L1-normalised uniform-LBP histogram over every pixel whose ring is inside
/// the image. Requires P == 8 (ConfigError otherwise).
std::vector<double> lbp_histogram(const GrayImage& img, const PatternConfig& cfg,
                                  const UniformTable& table = uniform_table());

/// Offsets below this distance from an integer are snapped onto the lattice so
/// that rotated copies of the same geometry read identical pixels.
double snap_to_lattice(double v) noexcept;

}  // namespace loadtex
