#include <doctest.h>

#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"
#include "loadtex/load_descriptor.hpp"
#include "loadtex/synth.hpp"
#include "support.hpp"

using namespace loadtex;

namespace {

// Mean dense descriptor of one image at a single level.
std::vector<double> mean_descriptor(const GrayImage& img) {
  const std::vector<double> level{1.0};
  const DescriptorSet s = extract_dense(img, LoadConfig{}, 4, level);
  std::vector<double> m(s.dimension, 0.0);
  for (std::size_t i = 0; i < s.count(); ++i) {
    for (std::uint32_t j = 0; j < s.dimension; ++j) m[j] += s.row(i)[j] / double(s.count());
  }
  return m;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Mean pairwise distance within classes and across classes.
std::pair<double, double> intra_inter(const std::vector<std::vector<std::vector<double>>>& by_class) {
  double intra = 0.0, inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (std::size_t a = 0; a < by_class.size(); ++a) {
    for (std::size_t b = a; b < by_class.size(); ++b) {
      for (std::size_t i = 0; i < by_class[a].size(); ++i) {
        for (std::size_t j = (a == b ? i + 1 : 0); j < by_class[b].size(); ++j) {
          const double d = dist(by_class[a][i], by_class[b][j]);
          if (a == b) {
            intra += d;
            ++n_intra;
          } else {
            inter += d;
            ++n_inter;
          }
        }
      }
    }
  }
  return {intra / n_intra, inter / n_inter};
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("generation is reproducible byte for byte") {
  testing::TempDir a("synth_a"), b("synth_b");
  SynthOptions opts;
  opts.classes = 2;
  opts.per_class = 4;
  opts.train_per_class = 2;
  opts.splits = 2;
  opts.size = 32;
  const DatasetManifest ma = synth_textures(opts, a.path());
  const DatasetManifest mb = synth_textures(opts, b.path());
  CHECK(ma.entries == mb.entries);
  CHECK(read_file_bytes(a.path() / "manifest.txt") == read_file_bytes(b.path() / "manifest.txt"));
  for (const auto& e : ma.entries) CHECK(read_file_bytes(a.path() / e.path) == read_file_bytes(b.path() / e.path));
  CHECK(load_manifest(a.path() / "manifest.txt").entries == ma.entries);
  CHECK(ma.splits().size() == 2);
}

TEST_CASE("test images are transformed copies") {
  testing::TempDir dir("synth_t");
  SynthOptions opts;
  opts.classes = 2;
  opts.per_class = 3;
  opts.train_per_class = 1;
  opts.splits = 3;
  const DatasetManifest m = synth_textures(opts, dir.path());
  for (const auto& e : m.entries) {
    const bool is_test = e.path.ends_with("_t.pgm");
    for (const auto& t : e.tags) CHECK((t.role == SplitRole::Test) == is_test);
    const GrayImage img = load_image(dir.path() / e.path);
    CHECK(img.width() == 64);
    for (float v : img.pixels()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 255.0f);
    }
  }
  CHECK_NOTHROW(validate_manifest(m, true));
}

TEST_CASE("options are validated") {
  testing::TempDir dir("synth_bad");
  SynthOptions opts;
  opts.classes = 11;
  CHECK_THROWS_AS(synth_textures(opts, dir.path()), Error);
  CHECK_THROWS_AS(texture_class(10), Error);
}

TEST_CASE("classes are separated by the descriptor") {
  std::vector<std::vector<std::vector<double>>> by_class(5);
  for (int c = 0; c < 5; ++c) {
    std::mt19937_64 rng(100 + c);
    for (int i = 0; i < 4; ++i) by_class[c].push_back(mean_descriptor(render_texture(texture_class(c), 64, rng)));
  }
  const auto [intra, inter] = intra_inter(by_class);
  CHECK(inter > 1.5 * intra);

  // Two classes with identical parameters: no separation beyond noise.
  std::vector<std::vector<std::vector<double>>> same(2);
  for (int c = 0; c < 2; ++c) {
    std::mt19937_64 rng(200 + c);
    for (int i = 0; i < 4; ++i) same[c].push_back(mean_descriptor(render_texture(texture_class(2), 64, rng)));
  }
  const auto [intra_s, inter_s] = intra_inter(same);
  CHECK(inter_s < 1.3 * intra_s);
}

}  // TEST_SUITE
