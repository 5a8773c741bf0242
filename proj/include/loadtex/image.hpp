#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace loadtex {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Immutable row-major grayscale raster. Intensities are 32-bit floats with a
/// nominal range of [0, 255]; out-of-range values are allowed (affine maps do
/// not clamp) but every value must be finite.
class GrayImage {
 public:
  GrayImage(int width, int height, std::vector<float> pixels);
  /// Constant image.
  GrayImage(int width, int height, float value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  float at(int x, int y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const float> pixels() const noexcept { return pixels_; }
  const float* data() const noexcept { return pixels_.data(); }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_;
  int height_;
  std::vector<float> pixels_;
};

/// Bilinear read at a sub-pixel position. Exact at lattice points and over
/// constant neighbourhoods. Throws OutOfBounds outside [0, w-1] x [0, h-1].
double sample_bilinear(const GrayImage& img, double x, double y);

/// Bilinear resampling to round(w*factor) x round(h*factor). Output
/// dimensions below 2*margin+1 (or below 1) raise DegenerateOutput.
/// factor == 1 returns an exact copy.
GrayImage rescale(const GrayImage& img, double factor, int margin = 0);

/// Lossless rotation by quarter_turns * 90 degrees (counter-clockwise as
/// displayed, y axis pointing down). quarter_turns is taken modulo 4.
GrayImage rotate90(const GrayImage& img, int quarter_turns);

/// Where the pixel at `p` lands after rotate90(img, quarter_turns) for an image
/// of the given size.
Point rotate90_point(Point p, int width, int height, int quarter_turns);

/// Arbitrary-angle rotation about the image centre with bilinear resampling;
/// reads outside the source are clamped to the nearest border pixel.
GrayImage rotate_bilinear(const GrayImage& img, double radians);

/// v -> a*v + b for every pixel, no clamping. Requires a > 0.
GrayImage affine_intensity(const GrayImage& img, double a, double b);

/// v -> (v - min) / (max - min); a constant image maps to all zeros. Two
/// images related by an exactly representable positive affine map give
/// bit-identical results.
GrayImage normalize_range(const GrayImage& img);

struct SampleGrid {
  std::vector<Point> points;
  double scale_factor = 1.0;
  int step = 1;
  int columns = 0;
  int rows = 0;
};

/// Lattice points `step` apart starting at `margin`, keeping every point at
/// least `margin` pixels from the last row/column. Row-major order.
SampleGrid dense_grid(const GrayImage& img, int step, int margin);
SampleGrid dense_grid(int width, int height, int step, int margin);

/// Number of grid positions along an axis of length `extent`; 0 if none fit.
int grid_count(int extent, int step, int margin) noexcept;

}  // namespace loadtex
