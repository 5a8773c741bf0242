#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "loadtex/error.hpp"
#include "loadtex/linear_svm.hpp"
#include "support.hpp"

using namespace loadtex;

namespace {

struct Data {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Data clusters(int per_class, const std::vector<Eigen::Vector2d>& centres, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  Data d;
  d.x.resize(per_class * static_cast<int>(centres.size()), 2);
  int r = 0;
  for (std::size_t c = 0; c < centres.size(); ++c) {
    for (int i = 0; i < per_class; ++i, ++r) {
      d.x(r, 0) = centres[c](0) + g(rng);
      d.x(r, 1) = centres[c](1) + g(rng);
      d.y.push_back(static_cast<int>(c));
    }
  }
  return d;
}

// Geometric margin of direction u with the best offset, positive class 0.
double margin_along(const Data& d, const Eigen::Vector2d& u) {
  double lo_pos = 1e300, hi_neg = -1e300;
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const double p = d.x.row(i).dot(u);
    if (d.y[i] == 0) lo_pos = std::min(lo_pos, p);
    else hi_neg = std::max(hi_neg, p);
  }
  return (lo_pos - hi_neg) / 2.0;
}

const std::vector<std::string> kTwo{"a", "b"};
const std::vector<std::string> kThree{"a", "b", "c"};

}  // namespace

TEST_SUITE("linear_svm") {

TEST_CASE("separable clusters are classified perfectly") {
  const Data d = clusters(40, {{3, 3}, {-3, 0}, {2, -4}}, 0.8, 1);
  const SvmFit fit = train(d.x, d.y, kThree, 7);
  CHECK(fit.model.weights.rows() == 3);
  CHECK(fit.model.biases.size() == 3);
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const Prediction p = predict(fit.model, d.x.row(i).transpose());
    CHECK(p.label == d.y[i]);
    CHECK(p.scores.size() == 3);
  }
  CHECK(predict(fit.model, Eigen::Vector2d(3, 3)).label == 0);
  CHECK(predict(fit.model, Eigen::Vector2d(-3, 0)).label == 1);
}

TEST_CASE("dual ascent and duality gap") {
  const Data d = clusters(30, {{1, 0}, {-1, 0.5}}, 1.0, 3);  // overlapping
  SvmOptions opts;
  opts.c_param = 1.0;
  const SvmFit fit = train(d.x, d.y, kTwo, 1, opts);
  for (const BinaryTrace& t : fit.traces) {
    REQUIRE(!t.dual_objective.empty());
    for (std::size_t e = 1; e < t.dual_objective.size(); ++e) {
      CHECK(t.dual_objective[e] >= t.dual_objective[e - 1] - 1e-12 * std::abs(t.dual_objective[e - 1]));
    }
    CHECK(t.primal >= t.dual - 1e-12);
    CHECK(t.primal - t.dual <= opts.tolerance * std::abs(t.primal) + 1e-12);
    CHECK(t.epochs == static_cast<int>(t.dual_objective.size()));
  }
}

TEST_CASE("max-margin direction on a tiny instance") {
  Data d;
  d.x.resize(6, 2);
  d.x << 1.0, 0.1, 1.1, -0.05, 0.95, -0.1, -1.0, 0.08, -0.9, -0.1, -1.05, 0.02;
  d.y = {0, 0, 0, 1, 1, 1};
  const SvmFit fit = train(d.x, d.y, kTwo, 0);
  const Eigen::Vector2d w = fit.model.weights.row(0).transpose();
  const double angle = std::acos(std::abs(w.normalized()(0))) * 180.0 / std::numbers::pi;
  CHECK(angle < 5.0);
  CHECK(w(0) > 0.0);

  double best = -1e300;
  for (int a = 0; a < 3600; ++a) {
    const double t = 2.0 * std::numbers::pi * a / 3600.0;
    best = std::max(best, margin_along(d, Eigen::Vector2d(std::cos(t), std::sin(t))));
  }
  const double got = margin_along(d, w.normalized());
  CHECK(got > 0.0);
  CHECK(got >= 0.9 * best);
}

TEST_CASE("deterministic and thread independent") {
  const Data d = clusters(25, {{1, 1}, {-1, 1}, {0, -1}}, 0.9, 5);
  SvmOptions one;
  one.threads = 1;
  SvmOptions four;
  four.threads = 4;
  const auto a = encode_linear_model(train(d.x, d.y, kThree, 11, one).model);
  const auto b = encode_linear_model(train(d.x, d.y, kThree, 11, four).model);
  const auto c = encode_linear_model(train(d.x, d.y, kThree, 11, one).model);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("prediction") {
  LinearModel m;
  m.classes = kThree;
  m.weights = Eigen::MatrixXd(3, 2);
  m.weights << 1, 0, 1, 0, 0, 1;
  m.biases = Eigen::Vector3d(0, 0, 0);
  CHECK(predict(m, Eigen::Vector2d(2, 1)).label == 0);  // tie between 0 and 1
  CHECK(predict(m, Eigen::Vector2d(1, 2)).label == 2);
  LinearModel scaled = m;
  scaled.weights *= 3.5;
  scaled.biases *= 3.5;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d x(g(rng), g(rng));
    CHECK(predict(m, x).label == predict(scaled, x).label);
  }
  CHECK_THROWS_AS(predict(m, Eigen::Vector3d(1, 2, 3)), Error);
}

TEST_CASE("label errors") {
  const Data d = clusters(5, {{1, 1}, {-1, -1}}, 0.1, 1);
  const std::vector<int> single(10, 0);
  try {
    train(d.x, single, kTwo, 0);
    FAIL("expected DegenerateLabels");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateLabels);
  }
  CHECK_THROWS_AS(train(d.x, d.y, std::vector<std::string>{"only"}, 0), Error);
  CHECK_THROWS_AS(train(d.x, std::vector<int>(3, 0), kTwo, 0), Error);
}

TEST_CASE("LSVM round trip") {
  const Data d = clusters(10, {{1, 1}, {-1, -1}}, 0.3, 2);
  const LinearModel m = train(d.x, d.y, kTwo, 0).model;
  const auto bytes = encode_linear_model(m);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "LSVM");
  const LinearModel back = decode_linear_model(bytes);
  CHECK(back.weights == m.weights);
  CHECK(back.biases == m.biases);
  testing::TempDir dir("svm");
  save_linear_model(m, dir.path() / "m.lsvm");
  CHECK(std::filesystem::exists(labels_sidecar(dir.path() / "m.lsvm")));
  const LinearModel loaded = load_linear_model(dir.path() / "m.lsvm");
  CHECK(loaded.classes == kTwo);
  CHECK(loaded.weights == m.weights);
  try {
    load_linear_model(dir.path() / "absent.lsvm");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingFile);
  }
}

}  // TEST_SUITE
