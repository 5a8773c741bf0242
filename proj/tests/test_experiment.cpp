#include <doctest.h>

#include <fstream>
#include <numeric>

#include "loadtex/error.hpp"
#include "loadtex/experiment.hpp"
#include "loadtex/image_io.hpp"
#include "loadtex/synth.hpp"
#include "support.hpp"

using namespace loadtex;

namespace {

SynthOptions small_set() {
  SynthOptions opts;
  opts.classes = 3;
  opts.per_class = 6;
  opts.train_per_class = 3;
  opts.splits = 2;
  opts.seed = 4;
  return opts;
}

ExperimentConfig small_config(const std::filesystem::path& cache) {
  ExperimentConfig cfg = ExperimentConfig::desk();
  cfg.gmm_components = 4;
  cfg.pca_dim = 16;
  cfg.vocab_size = 1500;
  cfg.threads = 1;
  cfg.cache_dir = cache;
  return cfg;
}

std::vector<DescriptorSet> fake_sets(const std::vector<std::size_t>& counts) {
  std::vector<DescriptorSet> sets;
  float next = 0.0f;
  for (std::size_t n : counts) {
    DescriptorSet s(2);
    for (std::size_t i = 0; i < n; ++i) {
      s.append(std::vector<float>{next, static_cast<float>(sets.size())});
      next += 1.0f;
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("profiles") {
  const ExperimentConfig paper = ExperimentConfig::paper();
  CHECK(paper.gmm_components == 256);
  CHECK(paper.pca_dim == 100);
  CHECK(paper.vocab_size == 100000);
  CHECK(paper.c_param == 10.0);
  CHECK(paper.step == 4);
  CHECK(paper.pyramid.size() == 6);
  CHECK(2 * paper.pca_dim * paper.gmm_components == 51200);
  const ExperimentConfig desk = ExperimentConfig::desk();
  CHECK(desk.gmm_components == 16);
  CHECK(desk.pca_dim == 32);
  CHECK(desk.vocab_size == 10000);
  CHECK_NOTHROW(paper.validate());
  CHECK_NOTHROW(desk.validate());
}

TEST_CASE("configuration validation") {
  ExperimentConfig cfg = ExperimentConfig::desk();
  cfg.pca_dim = 237;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = ExperimentConfig::desk();
  cfg.load.scales = {1, 3};
  cfg.pca_dim = 119;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.pca_dim = 118;
  CHECK_NOTHROW(cfg.validate());
  cfg = ExperimentConfig::desk();
  cfg.step = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = ExperimentConfig::desk();
  cfg.c_param = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = ExperimentConfig::desk();
  cfg.pyramid = {};
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("cache keys cover the parameters") {
  ExperimentConfig a = ExperimentConfig::desk();
  ExperimentConfig b = a;
  CHECK(a.descriptor_key() == b.descriptor_key());
  b.load.scales = {1, 2, 3};
  CHECK(a.descriptor_key() != b.descriptor_key());
  b = a;
  b.load.adaptive = false;
  CHECK(a.descriptor_key() != b.descriptor_key());
  b = a;
  b.pyramid = {1.0};
  CHECK(a.descriptor_key() != b.descriptor_key());
  b = a;
  b.gmm_components = 8;
  CHECK(a.descriptor_key() == b.descriptor_key());
  CHECK(a.encoder_key() != b.encoder_key());
  b = a;
  b.seed = 1;
  CHECK(a.encoder_key() != b.encoder_key());
}

TEST_CASE("describe_image") {
  const GrayImage img = testing::noise(64, 64, 3);
  ExperimentConfig cfg = ExperimentConfig::desk();
  CHECK(describe_image(img, cfg).count() == 209);
  cfg.descriptor = DescriptorKind::Lbp;
  const DescriptorSet h = describe_image(img, cfg);
  CHECK(h.count() == 1);
  CHECK(h.dimension == 59);
}

TEST_CASE("vocabulary sampling") {
  const auto sets = fake_sets({50, 10, 40});
  const std::vector<int> labels{0, 1, 1};
  ExperimentConfig cfg = ExperimentConfig::desk();
  cfg.vocab_size = 30;
  const Eigen::MatrixXd a = sample_vocabulary(sets, labels, cfg);
  CHECK(a.rows() == 30);
  CHECK(a == sample_vocabulary(sets, labels, cfg));
  // Without replacement: all rows distinct.
  std::vector<double> ids(a.col(0).data(), a.col(0).data() + a.rows());
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
  cfg.seed = 9;
  CHECK(a != sample_vocabulary(sets, labels, cfg));

  cfg.stratified_vocab = true;
  const Eigen::MatrixXd s = sample_vocabulary(sets, labels, cfg);
  CHECK(s.rows() == 30);
  const auto from_class0 = (s.col(1).array() == 0.0).count();
  CHECK(from_class0 == 15);

  cfg.stratified_vocab = false;
  cfg.vocab_size = 1000;
  CHECK(sample_vocabulary(sets, labels, cfg).rows() == 100);
}

TEST_CASE("pipeline is deterministic and cached") {
  testing::TempDir data("exp_data"), c1("exp_c1"), c2("exp_c2");
  const DatasetManifest m = synth_textures(small_set(), data.path());

  const EvalReport cold = run_experiment(m, small_config(c1.path()));
  REQUIRE(cold.splits.size() == 2);
  const EvalReport warm = run_experiment(m, small_config(c1.path()));
  ExperimentConfig threaded = small_config(c2.path());
  threaded.threads = 3;
  const EvalReport other = run_experiment(m, threaded);
  CHECK(report_csv(cold) == report_csv(warm));
  CHECK(report_csv(cold) == report_csv(other));
  CHECK(report_text(cold) == report_text(other));

  // Every model and feature file is byte-identical across the two caches.
  for (const auto& e : std::filesystem::recursive_directory_iterator(c1.path())) {
    if (!e.is_regular_file()) continue;
    const auto twin = c2.path() / std::filesystem::relative(e.path(), c1.path());
    REQUIRE(std::filesystem::exists(twin));
    CHECK(read_file_bytes(e.path()) == read_file_bytes(twin));
  }

  CHECK(cold.mean == std::accumulate(cold.accuracy.begin(), cold.accuracy.end(), 0.0) / 2.0);
  std::size_t trace = 0, total = 0;
  for (std::size_t r = 0; r < cold.classes.size(); ++r) {
    std::size_t row = 0;
    for (std::size_t v : cold.confusion[r]) row += v;
    CHECK(row == 2 * 3);  // 3 test images per class in each of 2 splits
    trace += cold.confusion[r][r];
    total += row;
  }
  CHECK(100.0 * double(trace) / double(total) == doctest::Approx(cold.mean));
  CHECK(report_csv(cold).find("mean,") != std::string::npos);
  CHECK(timing_csv(cold.timing).starts_with("stage,seconds"));
}

TEST_CASE("LBP baseline runs through the same protocol") {
  testing::TempDir data("exp_lbp"), cache("exp_lbp_c");
  const DatasetManifest m = synth_textures(small_set(), data.path());
  ExperimentConfig cfg = small_config(cache.path());
  cfg.descriptor = DescriptorKind::Lbp;
  const EvalReport r = run_experiment(m, cfg);
  CHECK(r.accuracy.size() == 2);
}

TEST_CASE("stage errors name the stage and the image") {
  testing::TempDir data("exp_bad"), cache("exp_bad_c");
  const DatasetManifest m = synth_textures(small_set(), data.path());
  const auto victim = data.path() / m.entries[4].path;
  std::ofstream(victim, std::ios::binary) << "P5\n64 64\n255\n";  // truncated raster
  try {
    run_experiment(m, small_config(cache.path()));
    FAIL("expected a stage error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(e.code() == Errc::MalformedFile);
    CHECK(what.find("extract") != std::string::npos);
    CHECK(what.find(m.entries[4].path) != std::string::npos);
  }
}

TEST_CASE("too few descriptors for the vocabulary") {
  testing::TempDir data("exp_few"), cache("exp_few_c");
  const DatasetManifest m = synth_textures(small_set(), data.path());
  ExperimentConfig cfg = small_config(cache.path());
  cfg.pyramid = {0.75};  // 48 px: four grid points per image
  cfg.pca_dim = 64;
  try {
    run_experiment(m, cfg);
    FAIL("expected InsufficientSamples");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InsufficientSamples);
  }
}

}  // TEST_SUITE
