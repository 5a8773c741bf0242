#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "loadtex/binary_patterns.hpp"
#include "loadtex/descriptor_set.hpp"
#include "loadtex/image.hpp"

namespace loadtex {

struct LoadConfig {
  /// Ring radii s*R, strictly increasing.
  std::vector<double> scales{1.0, 2.0, 3.0, 4.0};
  /// Radius of the circular support around the reference point O.
  double patch_radius = 15.0;
  /// Fixed at 8: the 59-bin uniform table is built for eight neighbours.
  int neighbors = 8;
  /// Radius of the ring the gradient magnitude is read from (fixed at 1).
  double magnitude_radius = 1.0;
  /// When false, every point uses the image frame (theta = 0) instead of the
  /// orientation of O->A. Only useful as a non-invariant comparison.
  bool adaptive = true;

  void validate() const;
  std::uint32_t dimension() const noexcept {
    return static_cast<std::uint32_t>(kUniformBins * scales.size());
  }
  /// Minimum distance from any border for a reference point:
  /// ceil(patch_radius + max scale) + 1.
  int margin() const;
};

/// Orientation of the adaptive coordinate system at A, for patch centre O.
struct AcsFrame {
  double theta = 0.0;
  Point center;
};

/// atan2(yA - yO, xA - xO), in (-pi, pi]. DegenerateInput when A == O.
double acs_theta(Point origin, Point a);

AcsFrame make_frame(Point origin, Point a);

/// Offset of neighbour p on a ring of radius r in the frame:
/// (r cos(2 pi p/P - theta), -r sin(2 pi p/P - theta)), lattice-snapped.
Point ring_offset(double theta, double radius, int p, int neighbors = 8);

/// Binary code of the frame centre against its 8 ring neighbours at `radius`.
std::uint8_t load_code(const GrayImage& img, const AcsFrame& frame, double radius);

/// sqrt((V(A4) - V(A0))^2 + (V(A6) - V(A2))^2) on the unit ring of the frame.
double adaptive_magnitude(const GrayImage& img, const AcsFrame& frame);

/// L1 normalisation followed by an element-wise square root. The zero vector
/// is returned unchanged; negative entries raise NegativeEntry.
std::vector<double> root_normalize(std::span<const double> h);

struct LoadDescriptor {
  std::vector<float> values;
  std::size_t scale_count = 0;
};

/// Precomputes the patch geometry once so that every reference point costs
/// only pixel reads. Immutable and safe to share between threads.
class LoadExtractor {
 public:
  explicit LoadExtractor(LoadConfig cfg, const UniformTable& table = uniform_table());

  const LoadConfig& config() const noexcept { return cfg_; }
  std::size_t contributing_points() const noexcept { return points_.size(); }

  /// O must be a lattice point at least margin() pixels from every border.
  LoadDescriptor extract(const GrayImage& img, Point origin) const;

  /// Extracts one descriptor per point and appends them to `out`.
  void extract_points(const GrayImage& img, std::span<const Point> origins,
                      DescriptorSet& out) const;

  /// Un-normalised 59*S histogram; exposed for tests.
  std::vector<double> histogram(const GrayImage& img, Point origin) const;

 private:
  struct Tap {
    int dx;
    int dy;
    double fx;
    double fy;
  };
  struct BoundTap {
    std::ptrdiff_t offset;
    double fx;
    double fy;
  };

  std::vector<BoundTap> bind(int width) const;
  void check_origin(const GrayImage& img, Point origin) const;
  void accumulate(const GrayImage& img, std::span<const BoundTap> taps, Point origin,
                  std::span<double> hist) const;

  LoadConfig cfg_;
  const UniformTable* table_;
  int margin_;
  // Contributing lattice offsets relative to O, and per point (relative to A)
  // 4 magnitude taps followed by 8 taps per scale.
  std::vector<std::pair<int, int>> points_;
  std::vector<Tap> taps_;
};

/// One-shot convenience wrapper around LoadExtractor.
LoadDescriptor extract(const GrayImage& img, Point origin, const LoadConfig& cfg,
                       const UniformTable& table = uniform_table());

/// 2^{-i/2} for i = -1..4.
std::vector<double> default_pyramid_factors();

/// Descriptors at every dense-grid point of every pyramid level, ordered by
/// level then row-major grid position. The pyramid is built from
/// normalize_range(img). Levels too small for one point are
/// skipped; DegenerateOutput if no level yields any point.
DescriptorSet extract_dense(const GrayImage& img, const LoadConfig& cfg, int step,
                            std::span<const double> pyramid_factors);

DescriptorSet extract_dense(const GrayImage& img, const LoadExtractor& extractor, int step,
                            std::span<const double> pyramid_factors);

}  // namespace loadtex
