#include "loadtex/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "loadtex/error.hpp"
#include "loadtex/synth.hpp"

namespace loadtex {

namespace {

struct Transform {
  std::string name;
  std::function<GrayImage(const GrayImage&)> image;
  std::function<Point(Point, int, int)> point;
};

std::vector<Transform> transforms(const InvarianceOptions& options) {
  std::vector<Transform> out;
  out.push_back({"identity", [](const GrayImage& g) { return g; }, [](Point p, int, int) { return p; }});
  out.push_back({"affine",
                 [&options](const GrayImage& g) { return affine_intensity(g, options.gain, options.offset); },
                 [](Point p, int, int) { return p; }});
  for (int k = 1; k <= 3; ++k) {
    out.push_back({"rot" + std::to_string(90 * k), [k](const GrayImage& g) { return rotate90(g, k); },
                   [k](Point p, int w, int h) { return rotate90_point(p, w, h, k); }});
  }
  return out;
}

}  // namespace

std::vector<InvarianceRow> invariance_bench(const std::vector<GrayImage>& images,
                                            const LoadConfig& cfg,
                                            const InvarianceOptions& options) {
  if (images.empty()) throw Error(Errc::EmptyInput, "invariance bench needs at least one image");
  const LoadExtractor extractor(cfg);
  const int margin = cfg.margin();
  std::vector<InvarianceRow> rows;
  for (const auto& t : transforms(options)) {
    InvarianceRow row;
    row.transform = t.name;
    row.images = images.size();
    double sum = 0.0;
    for (const auto& img : images) {
      for (double f : options.pyramid) {
        const GrayImage level = f == 1.0 ? img : rescale(img, f);
        const auto grid = dense_grid(level, options.step, margin);
        if (grid.points.empty()) continue;
        const GrayImage moved = t.image(level);
        std::vector<Point> mapped;
        mapped.reserve(grid.points.size());
        for (const Point& p : grid.points) mapped.push_back(t.point(p, level.width(), level.height()));
        DescriptorSet a(cfg.dimension());
        DescriptorSet b(cfg.dimension());
        extractor.extract_points(level, grid.points, a);
        extractor.extract_points(moved, mapped, b);
        for (std::size_t i = 0; i < a.count(); ++i) {
          double d = 0.0;
          const auto ra = a.row(i);
          const auto rb = b.row(i);
          for (std::size_t j = 0; j < ra.size(); ++j) d += std::abs(static_cast<double>(ra[j]) - rb[j]);
          sum += d;
          row.max_l1 = std::max(row.max_l1, d);
        }
        row.descriptors += a.count();
      }
    }
    if (row.descriptors == 0) throw Error(Errc::DegenerateOutput, "images too small for any grid point");
    row.mean_l1 = sum / static_cast<double>(row.descriptors);
    rows.push_back(row);
  }
  return rows;
}

std::string invariance_csv(const std::vector<InvarianceRow>& rows) {
  std::string out = "transform,images,descriptors,mean_l1,max_l1\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%.9g,%.9g\n", r.transform.c_str(), r.images,
                  r.descriptors, r.mean_l1, r.max_l1);
    out += buf;
  }
  return out;
}

ThroughputResult throughput_bench(const LoadConfig& cfg, int size, int repeats, int step,
                                  std::uint64_t seed) {
  if (repeats < 1) throw Error(Errc::ConfigError, "repeats must be positive");
  std::mt19937_64 rng(seed);
  std::vector<GrayImage> images;
  for (int r = 0; r < repeats; ++r) images.push_back(noise_image(size, size, rng));
  const LoadExtractor extractor(cfg);
  const auto pyramid = default_pyramid_factors();
  ThroughputResult result;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& img : images) result.descriptors += extract_dense(img, extractor, step, pyramid).count();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.per_second = result.seconds > 0.0 ? static_cast<double>(result.descriptors) / result.seconds : 0.0;
  return result;
}

}  // namespace loadtex
