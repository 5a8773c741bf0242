#include "loadtex/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loadtex/error.hpp"

namespace loadtex {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(Errc::DegenerateInput, "image dimensions must be positive, got " +
                                           std::to_string(width) + "x" +
                                           std::to_string(height));
  }
}

// Lerp form keeps constant neighbourhoods exact: a + t*(a-a) == a.
inline double lerp2(double v00, double v10, double v01, double v11, double fx,
                    double fy) {
  const double top = v00 + fx * (v10 - v00);
  const double bottom = v01 + fx * (v11 - v01);
  return top + fy * (bottom - top);
}

double sample_clamped(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  return sample_bilinear(img, x, y);
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::vector<float> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(Errc::DimensionMismatch,
                "pixel buffer holds " + std::to_string(pixels_.size()) +
                    " values, expected " + std::to_string(width * height));
  }
  for (float v : pixels_) {
    if (!std::isfinite(v)) {
      throw Error(Errc::DegenerateInput, "non-finite pixel intensity");
    }
  }
}

GrayImage::GrayImage(int width, int height, float value)
    : GrayImage(width, height,
                std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) *
                                       static_cast<std::size_t>(std::max(height, 0)),
                                   value)) {}

double sample_bilinear(const GrayImage& img, double x, double y) {
  const double max_x = img.width() - 1;
  const double max_y = img.height() - 1;
  if (!(x >= 0.0 && x <= max_x && y >= 0.0 && y <= max_y)) {
    throw Error(Errc::OutOfBounds, "sample at (" + std::to_string(x) + ", " +
                                       std::to_string(y) + ") outside " +
                                       std::to_string(img.width()) + "x" +
                                       std::to_string(img.height()));
  }
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  // On the last row/column step back one cell so x0+1 stays valid.
  if (x0 == img.width() - 1 && x0 > 0) --x0;
  if (y0 == img.height() - 1 && y0 > 0) --y0;
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  return lerp2(img.at(x0, y0), img.at(x1, y0), img.at(x0, y1), img.at(x1, y1), fx,
               fy);
}

GrayImage rescale(const GrayImage& img, double factor, int margin) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(Errc::ConfigError, "rescale factor must be positive");
  }
  const int out_w = static_cast<int>(std::lround(img.width() * factor));
  const int out_h = static_cast<int>(std::lround(img.height() * factor));
  const int min_side = std::max(1, 2 * margin + 1);
  if (out_w < min_side || out_h < min_side) {
    throw Error(Errc::DegenerateOutput,
                "rescaled image " + std::to_string(out_w) + "x" +
                    std::to_string(out_h) + " smaller than " +
                    std::to_string(min_side) + " (margin " +
                    std::to_string(margin) + ")");
  }
  if (out_w == img.width() && out_h == img.height()) {
    return img;
  }
  // Pixel-centre alignment using the realised ratio so the mapping is
  // mirror-symmetric; this makes rescale commute with rotate90.
  const double sx = static_cast<double>(img.width()) / out_w;
  const double sy = static_cast<double>(img.height()) / out_h;
  std::vector<float> out(static_cast<std::size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_w; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      out[static_cast<std::size_t>(y) * out_w + x] =
          static_cast<float>(sample_clamped(img, src_x, src_y));
    }
  }
  return GrayImage(out_w, out_h, std::move(out));
}

Point rotate90_point(Point p, int width, int height, int quarter_turns) {
  const int turns = ((quarter_turns % 4) + 4) % 4;
  for (int t = 0; t < turns; ++t) {
    // One counter-clockwise quarter turn: (x, y) -> (y, w-1-x), w <-> h.
    p = Point{p.y, static_cast<double>(width - 1) - p.x};
    std::swap(width, height);
  }
  return p;
}

GrayImage rotate90(const GrayImage& img, int quarter_turns) {
  const int turns = ((quarter_turns % 4) + 4) % 4;
  const int w = img.width();
  const int h = img.height();
  const int out_w = (turns % 2 == 0) ? w : h;
  const int out_h = (turns % 2 == 0) ? h : w;
  std::vector<float> out(img.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int nx = 0;
      int ny = 0;
      switch (turns) {
        case 0: nx = x; ny = y; break;
        case 1: nx = y; ny = w - 1 - x; break;
        case 2: nx = w - 1 - x; ny = h - 1 - y; break;
        default: nx = h - 1 - y; ny = x; break;
      }
      out[static_cast<std::size_t>(ny) * out_w + nx] = img.at(x, y);
    }
  }
  return GrayImage(out_w, out_h, std::move(out));
}

GrayImage rotate_bilinear(const GrayImage& img, double radians) {
  const double cx = (img.width() - 1) / 2.0;
  const double cy = (img.height() - 1) / 2.0;
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  std::vector<float> out(img.size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      // Inverse map, same orientation convention as rotate90.
      const double dx = x - cx;
      const double dy = y - cy;
      const double src_x = cx + c * dx - s * dy;
      const double src_y = cy + s * dx + c * dy;
      out[static_cast<std::size_t>(y) * img.width() + x] =
          static_cast<float>(sample_clamped(img, src_x, src_y));
    }
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

GrayImage affine_intensity(const GrayImage& img, double a, double b) {
  if (!(a > 0.0)) {
    throw Error(Errc::ConfigError, "affine gain must be positive");
  }
  std::vector<float> out(img.size());
  const auto src = img.pixels();
  std::transform(src.begin(), src.end(), out.begin(),
                 [a, b](float v) { return static_cast<float>(a * v + b); });
  return GrayImage(img.width(), img.height(), std::move(out));
}

GrayImage normalize_range(const GrayImage& img) {
  const auto src = img.pixels();
  std::vector<float> out(img.size(), 0.0f);
  if (src.empty()) return GrayImage(img.width(), img.height(), std::move(out));
  const auto [lo, hi] = std::minmax_element(src.begin(), src.end());
  const float low = *lo;
  const float range = *hi - *lo;
  if (range > 0.0f) {
    std::transform(src.begin(), src.end(), out.begin(),
                   [low, range](float v) { return (v - low) / range; });
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

int grid_count(int extent, int step, int margin) noexcept {
  if (step < 1 || margin < 0) return 0;
  const int span = extent - 2 * margin - 1;
  if (span < 0) return 0;
  return span / step + 1;
}

SampleGrid dense_grid(int width, int height, int step, int margin) {
  if (step < 1) {
    throw Error(Errc::ConfigError, "grid step must be >= 1");
  }
  const int nx = grid_count(width, step, margin);
  const int ny = grid_count(height, step, margin);
  if (nx == 0 || ny == 0) {
    throw Error(Errc::DegenerateOutput,
                "image " + std::to_string(width) + "x" + std::to_string(height) +
                    " admits no grid point with margin " + std::to_string(margin));
  }
  SampleGrid grid;
  grid.step = step;
  grid.columns = nx;
  grid.rows = ny;
  grid.points.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      grid.points.push_back(Point{static_cast<double>(margin + i * step),
                                  static_cast<double>(margin + j * step)});
    }
  }
  return grid;
}

SampleGrid dense_grid(const GrayImage& img, int step, int margin) {
  return dense_grid(img.width(), img.height(), step, margin);
}

}  // namespace loadtex
