#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace loadtex {

/// Diagonal-covariance Gaussian mixture.
struct GmmModel {
  Eigen::VectorXd priors;  // K, on the simplex
  Eigen::MatrixXd means;   // K x D
  Eigen::MatrixXd sigmas;  // K x D standard deviations

  int components() const noexcept { return static_cast<int>(priors.size()); }
  int dimension() const noexcept { return static_cast<int>(means.cols()); }
};

struct GmmOptions {
  int max_iterations = 100;
  /// Stop once (LL_t - LL_{t-1}) / |LL_{t-1}| falls below this.
  double tolerance = 1e-5;
  /// Lower bound on sigma^2, relative to the per-dimension data variance.
  double variance_floor = 1e-4;
  int kmeans_iterations = 10;
  int threads = 1;
};

struct GmmFit {
  GmmModel model;
  /// Total log-likelihood of the data under each successive parameter set,
  /// starting with the k-means initialisation and ending with `model`.
  std::vector<double> log_likelihood;
  std::vector<double> variance_floor;  // D, absolute sigma^2 floor used
};

/// EM from a seeded k-means++ / Lloyd initialisation. Deterministic for a
/// given seed, independent of `options.threads`.
GmmFit gmm_fit(const Eigen::MatrixXd& samples, int components, std::uint64_t seed,
               const GmmOptions& options = {});

/// log(pi_k N(x; mu_k, sigma_k^2)) for every component.
Eigen::VectorXd component_log_densities(const GmmModel& model, const Eigen::VectorXd& x);

/// Soft assignments, computed in log space; sums to 1.
Eigen::VectorXd posterior(const GmmModel& model, const Eigen::VectorXd& x);

/// sum_t log p(x_t) over the rows of `samples`.
double log_likelihood(const GmmModel& model, const Eigen::MatrixXd& samples);

/// Checks shapes, simplex and positivity; ConfigError on violation.
void validate(const GmmModel& model);

// "LGMM": magic, u32 version, u32 D, u32 K, then f64 priors (K), means
// (K x D) and sigmas (K x D), row-major.
std::vector<std::uint8_t> encode_gmm(const GmmModel& model);
GmmModel decode_gmm(std::span<const std::uint8_t> bytes);
void save_gmm(const GmmModel& model, const std::filesystem::path& path);
GmmModel load_gmm(const std::filesystem::path& path);

}  // namespace loadtex
