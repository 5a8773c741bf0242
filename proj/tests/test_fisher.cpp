#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "loadtex/error.hpp"
#include "loadtex/fisher.hpp"
#include "support.hpp"

using namespace loadtex;

namespace {

GmmModel random_model(int k, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::normal_distribution<double> g;
  GmmModel m;
  m.priors = Eigen::VectorXd(k);
  m.means = Eigen::MatrixXd(k, d);
  m.sigmas = Eigen::MatrixXd(k, d);
  for (int i = 0; i < k; ++i) {
    m.priors(i) = u(rng);
    for (int j = 0; j < d; ++j) {
      m.means(i, j) = 2.0 * g(rng);
      m.sigmas(i, j) = u(rng);
    }
  }
  m.priors /= m.priors.sum();
  return m;
}

Eigen::MatrixXd samples(int t, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 2.0);
  Eigen::MatrixXd x(t, d);
  for (int i = 0; i < t * d; ++i) x.data()[i] = g(rng);
  return x;
}

double total_ll(const GmmModel& m, const Eigen::MatrixXd& x) {
  double total = 0.0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    double p = 0.0;
    for (int k = 0; k < m.components(); ++k) {
      double dens = m.priors(k);
      for (int d = 0; d < m.dimension(); ++d) {
        const double z = (x(t, d) - m.means(k, d)) / m.sigmas(k, d);
        dens *= std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * m.sigmas(k, d));
      }
      p += dens;
    }
    total += std::log(p);
  }
  return total;
}

}  // namespace

TEST_SUITE("fisher") {

TEST_CASE("matches the normalised finite-difference gradient") {
  const int K = 3, D = 4, T = 50;
  const GmmModel m = random_model(K, D, 1);
  const Eigen::MatrixXd x = samples(T, D, 2);
  const Eigen::VectorXd fv = fisher_encode_raw(m, x);
  REQUIRE(fv.size() == 2 * K * D);
  const double h = 1e-4;
  for (int k = 0; k < K; ++k) {
    for (int d = 0; d < D; ++d) {
      GmmModel plus = m, minus = m;
      plus.means(k, d) += h;
      minus.means(k, d) -= h;
      const double g_mu = (total_ll(plus, x) - total_ll(minus, x)) / (2 * h);
      const double expect_mu = g_mu * m.sigmas(k, d) / std::sqrt(m.priors(k)) / T;
      plus = m;
      minus = m;
      plus.sigmas(k, d) += h;
      minus.sigmas(k, d) -= h;
      const double g_sigma = (total_ll(plus, x) - total_ll(minus, x)) / (2 * h);
      const double expect_sigma = g_sigma * m.sigmas(k, d) / std::sqrt(2.0 * m.priors(k)) / T;
      const double got_mu = fv(2 * D * k + d);
      const double got_sigma = fv(2 * D * k + D + d);
      CHECK(std::abs(got_mu - expect_mu) / std::max(std::abs(expect_mu), 1e-6) < 1e-3);
      CHECK(std::abs(got_sigma - expect_sigma) / std::max(std::abs(expect_sigma), 1e-6) < 1e-3);
    }
  }
}

TEST_CASE("descriptors at the single mean") {
  GmmModel m;
  m.priors = Eigen::VectorXd::Ones(1);
  m.means = Eigen::MatrixXd(1, 3);
  m.means << 1, -2, 0.5;
  m.sigmas = Eigen::MatrixXd::Constant(1, 3, 0.7);
  Eigen::MatrixXd x(5, 3);
  for (int i = 0; i < 5; ++i) x.row(i) = m.means.row(0);
  const Eigen::VectorXd fv = fisher_encode_raw(m, x);
  for (int d = 0; d < 3; ++d) {
    CHECK(fv(d) == 0.0);
    CHECK(fv(3 + d) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  }
}

TEST_CASE("length") {
  GmmModel m;
  m.priors = Eigen::VectorXd::Constant(256, 1.0 / 256);
  m.means = Eigen::MatrixXd::Zero(256, 100);
  m.sigmas = Eigen::MatrixXd::Ones(256, 100);
  CHECK(fisher_encode(m, samples(3, 100, 1)).size() == 51200);
}

TEST_CASE("order and duplication do not matter") {
  const GmmModel m = random_model(4, 3, 5);
  const Eigen::MatrixXd x = samples(30, 3, 6);
  const Eigen::VectorXd base = fisher_encode_raw(m, x);
  Eigen::MatrixXd reversed = x.colwise().reverse();
  CHECK((fisher_encode_raw(m, reversed) - base).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd twice(60, 3);
  twice << x, x;
  CHECK((fisher_encode_raw(m, twice) - base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("power and L2 normalisation") {
  const Eigen::VectorXd v = power_l2_normalize(Eigen::Vector3d(-4, 0, 4));
  CHECK(v(0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(v(1) == 0.0);
  CHECK(v(2) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(power_l2_normalize(Eigen::VectorXd::Zero(4)) == Eigen::VectorXd::Zero(4));
  const GmmModel m = random_model(3, 2, 9);
  const Eigen::MatrixXd x = samples(20, 2, 10);
  const Eigen::VectorXd raw = fisher_encode_raw(m, x);
  const Eigen::VectorXd fv = fisher_encode(m, x);
  CHECK(fv.norm() == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index i = 0; i < fv.size(); ++i) CHECK((fv(i) > 0) == (raw(i) > 0));
}

TEST_CASE("errors") {
  const GmmModel m = random_model(2, 3, 1);
  try {
    fisher_encode_raw(m, Eigen::MatrixXd(0, 3));
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyInput);
  }
  CHECK_THROWS_AS(fisher_encode_raw(m, samples(4, 2, 1)), Error);
}

}  // TEST_SUITE
