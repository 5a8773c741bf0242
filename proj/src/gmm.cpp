#include "loadtex/gmm.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "loadtex/binary_io.hpp"
#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"
#include "loadtex/parallel.hpp"

namespace loadtex {

namespace {

constexpr std::uint32_t kGmmVersion = 1;
constexpr Eigen::Index kChunkRows = 4096;
constexpr double kMinPrior = 1e-10;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

struct ChunkStats {
  Eigen::VectorXd weight;   // K
  Eigen::MatrixXd first;    // K x D, sum gamma * x
  Eigen::MatrixXd second;   // K x D, sum gamma * x^2
  double log_likelihood = 0.0;
};

struct Chunking {
  Eigen::Index rows;
  Eigen::Index count;
  Eigen::Index begin(Eigen::Index c) const { return c * kChunkRows; }
  Eigen::Index size(Eigen::Index c) const { return std::min(kChunkRows, rows - begin(c)); }
};

Chunking chunking(Eigen::Index rows) { return {rows, (rows + kChunkRows - 1) / kChunkRows}; }

// log(pi_k N(x; mu_k, sigma_k)) for a block of rows, via two matrix products.
Eigen::MatrixXd block_log_densities(const GmmModel& m, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::MatrixXd inv_var = m.sigmas.array().square().inverse().matrix();  // K x D
  const Eigen::VectorXd constant =
      m.priors.array().log() -
      0.5 * (m.dimension() * kLog2Pi + 2.0 * m.sigmas.array().log().rowwise().sum() +
             (m.means.array().square() * inv_var.array()).rowwise().sum());
  Eigen::MatrixXd out = -0.5 * (x.array().square().matrix() * inv_var.transpose());
  out.noalias() += x * (m.means.cwiseProduct(inv_var)).transpose();
  out.rowwise() += constant.transpose();
  return out;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

ChunkStats e_step_chunk(const GmmModel& m, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd gamma = block_log_densities(m, x);
  ChunkStats s;
  for (Eigen::Index i = 0; i < gamma.rows(); ++i) {
    const double lse = log_sum_exp(gamma.row(i));
    s.log_likelihood += lse;
    gamma.row(i) = (gamma.row(i).array() - lse).exp();
  }
  s.weight = gamma.colwise().sum().transpose();
  s.first = gamma.transpose() * x;
  s.second = gamma.transpose() * x.array().square().matrix();
  return s;
}

// Fixed chunk boundaries and a fixed reduction order keep the result
// independent of the number of threads.
ChunkStats e_step(const GmmModel& m, const Eigen::MatrixXd& samples, int threads) {
  const Chunking ch = chunking(samples.rows());
  std::vector<ChunkStats> parts(static_cast<std::size_t>(ch.count));
  parallel_for(parts.size(), threads, [&](std::size_t c) {
    const auto idx = static_cast<Eigen::Index>(c);
    parts[c] = e_step_chunk(m, samples.middleRows(ch.begin(idx), ch.size(idx)));
  });
  ChunkStats total = std::move(parts.front());
  for (std::size_t c = 1; c < parts.size(); ++c) {
    total.weight += parts[c].weight;
    total.first += parts[c].first;
    total.second += parts[c].second;
    total.log_likelihood += parts[c].log_likelihood;
  }
  return total;
}

GmmModel m_step(const GmmModel& previous, const ChunkStats& s, const Eigen::VectorXd& floor,
                double n) {
  GmmModel m = previous;
  for (Eigen::Index k = 0; k < m.components(); ++k) {
    const double nk = s.weight(k);
    m.priors(k) = std::max(nk / n, kMinPrior);
    if (nk <= 0.0) continue;  // keep the previous mean and spread
    m.means.row(k) = s.first.row(k) / nk;
    for (Eigen::Index d = 0; d < m.dimension(); ++d) {
      const double mu = m.means(k, d);
      const double var = s.second(k, d) / nk - mu * mu;
      m.sigmas(k, d) = std::sqrt(std::max(var, floor(d)));
    }
  }
  m.priors /= m.priors.sum();
  return m;
}

Eigen::VectorXd squared_distances(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& c) {
  return (x.rowwise() - c).rowwise().squaredNorm();
}

// k-means++ seeding followed by Lloyd refinement; returns a full mixture.
GmmModel kmeans_init(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng,
                     const Eigen::VectorXd& floor, const Eigen::VectorXd& data_var,
                     int lloyd_iterations) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd centers(k, d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  centers.row(0) = x.row(static_cast<Eigen::Index>(unit(rng) * n) % n);
  Eigen::VectorXd nearest = squared_distances(x, centers.row(0));
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest(i);
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(unit(rng) * n) % n;
    }
    centers.row(c) = x.row(pick);
    nearest = nearest.cwiseMin(squared_distances(x, centers.row(c)));
  }

  const Eigen::VectorXd x_norms = x.rowwise().squaredNorm();
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  auto assign_all = [&] {
    const Eigen::VectorXd c_norms = centers.rowwise().squaredNorm();
    const Chunking ch = chunking(n);
    for (Eigen::Index b = 0; b < ch.count; ++b) {
      const auto rows = x.middleRows(ch.begin(b), ch.size(b));
      Eigen::MatrixXd dist = -2.0 * rows * centers.transpose();
      dist.rowwise() += c_norms.transpose();
      dist.colwise() += x_norms.segment(ch.begin(b), ch.size(b));
      for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        Eigen::Index arg = 0;
        dist.row(i).minCoeff(&arg);
        assign[static_cast<std::size_t>(ch.begin(b) + i)] = static_cast<int>(arg);
      }
    }
  };

  for (int it = 0; it < lloyd_iterations; ++it) {
    assign_all();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      counts(assign[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    }
  }
  assign_all();

  GmmModel m;
  m.priors = Eigen::VectorXd::Zero(k);
  m.means = centers;
  m.sigmas.resize(k, d);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(k, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = assign[static_cast<std::size_t>(i)];
    m.priors(c) += 1.0;
    sq.row(c) += (x.row(i) - centers.row(c)).array().square().matrix();
  }
  for (int c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double var = m.priors(c) > 0.0 ? sq(c, j) / m.priors(c) : data_var(j);
      m.sigmas(c, j) = std::sqrt(std::max(var, floor(j)));
    }
  }
  m.priors = (m.priors.array() / static_cast<double>(n)).max(kMinPrior).matrix();
  m.priors /= m.priors.sum();
  return m;
}

}  // namespace

void validate(const GmmModel& model) {
  const auto k = model.priors.size();
  if (k < 1 || model.means.rows() != k || model.sigmas.rows() != k ||
      model.sigmas.cols() != model.means.cols() || model.means.cols() < 1) {
    throw Error(Errc::ConfigError, "GMM parameter shapes are inconsistent");
  }
  if (!model.priors.allFinite() || !model.means.allFinite() || !model.sigmas.allFinite()) {
    throw Error(Errc::ConfigError, "GMM parameters must be finite");
  }
  if ((model.priors.array() <= 0.0).any() || std::abs(model.priors.sum() - 1.0) > 1e-8) {
    throw Error(Errc::ConfigError, "GMM priors must be positive and sum to 1");
  }
  if ((model.sigmas.array() <= 0.0).any()) {
    throw Error(Errc::ConfigError, "GMM sigmas must be positive");
  }
}

GmmFit gmm_fit(const Eigen::MatrixXd& samples, int components, std::uint64_t seed,
               const GmmOptions& options) {
  const Eigen::Index n = samples.rows();
  if (components < 1) throw Error(Errc::ConfigError, "GMM needs at least one component");
  if (samples.cols() < 1) throw Error(Errc::ConfigError, "GMM samples have zero dimension");
  if (n < components) {
    throw Error(Errc::InsufficientSamples, std::to_string(n) + " samples for " +
                                               std::to_string(components) + " components");
  }
  if (!samples.allFinite()) throw Error(Errc::DegenerateInput, "GMM input contains non-finite values");
  if (n < 10 * static_cast<Eigen::Index>(components)) {
    spdlog::warn("GMM: {} samples for {} components (fewer than 10 per component)", n, components);
  }

  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::VectorXd data_var =
      ((samples.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n))
          .transpose();
  GmmFit fit;
  Eigen::VectorXd floor(samples.cols());
  for (Eigen::Index d = 0; d < samples.cols(); ++d) {
    floor(d) = options.variance_floor * (data_var(d) > 0.0 ? data_var(d) : 1.0);
  }
  fit.variance_floor.assign(floor.data(), floor.data() + floor.size());

  std::mt19937_64 rng(seed);
  GmmModel model = kmeans_init(samples, components, rng, floor, data_var, options.kmeans_iterations);

  for (int it = 0;; ++it) {
    const ChunkStats stats = e_step(model, samples, options.threads);
    if (!std::isfinite(stats.log_likelihood)) {
      throw Error(Errc::NumericalFailure, "non-finite log-likelihood at EM iteration " +
                                              std::to_string(it));
    }
    const double ll = stats.log_likelihood;
    if (!fit.log_likelihood.empty()) {
      const double prev = fit.log_likelihood.back();
      fit.log_likelihood.push_back(ll);
      if ((ll - prev) / std::abs(prev) < options.tolerance) break;
    } else {
      fit.log_likelihood.push_back(ll);
    }
    if (it >= options.max_iterations) break;
    model = m_step(model, stats, floor, static_cast<double>(n));
  }
  fit.model = std::move(model);
  return fit;
}

Eigen::VectorXd component_log_densities(const GmmModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dimension()) {
    throw Error(Errc::DimensionMismatch, "GMM input of length " + std::to_string(x.size()) +
                                             ", model dimension " +
                                             std::to_string(model.dimension()));
  }
  Eigen::VectorXd out(model.components());
  for (int k = 0; k < model.components(); ++k) {
    double quad = 0.0;
    double log_det = 0.0;
    for (int d = 0; d < model.dimension(); ++d) {
      const double z = (x(d) - model.means(k, d)) / model.sigmas(k, d);
      quad += z * z;
      log_det += std::log(model.sigmas(k, d));
    }
    out(k) = std::log(model.priors(k)) - 0.5 * (quad + model.dimension() * kLog2Pi) - log_det;
  }
  return out;
}

Eigen::VectorXd posterior(const GmmModel& model, const Eigen::VectorXd& x) {
  Eigen::VectorXd l = component_log_densities(model, x);
  const double lse = log_sum_exp(l.transpose());
  return (l.array() - lse).exp().matrix();
}

double log_likelihood(const GmmModel& model, const Eigen::MatrixXd& samples) {
  if (samples.cols() != model.dimension()) {
    throw Error(Errc::DimensionMismatch, "GMM input width differs from model dimension");
  }
  return e_step(model, samples, 1).log_likelihood;
}

std::vector<std::uint8_t> encode_gmm(const GmmModel& model) {
  ByteWriter w;
  w.magic("LGMM");
  w.put<std::uint32_t>(kGmmVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.dimension()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.components()));
  for (int k = 0; k < model.components(); ++k) w.put<double>(model.priors(k));
  for (const auto* m : {&model.means, &model.sigmas}) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) w.put<double>((*m)(r, c));
    }
  }
  return std::move(w.bytes());
}

GmmModel decode_gmm(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "GMM model");
  r.expect_magic("LGMM");
  if (const auto v = r.get<std::uint32_t>(); v != kGmmVersion) {
    throw Error(Errc::UnsupportedFormat, "GMM model version " + std::to_string(v));
  }
  const auto d = r.get<std::uint32_t>();
  const auto k = r.get<std::uint32_t>();
  if (d == 0 || k == 0) throw Error(Errc::MalformedFile, "GMM model: zero dimension");
  if (r.remaining() != sizeof(double) * (std::size_t{k} + 2 * std::size_t{k} * d)) {
    throw Error(Errc::MalformedFile, "GMM model: body size mismatch");
  }
  GmmModel m;
  m.priors.resize(k);
  r.get_all<double>({m.priors.data(), k});
  m.means.resize(k, d);
  m.sigmas.resize(k, d);
  for (auto* mat : {&m.means, &m.sigmas}) {
    for (std::uint32_t row = 0; row < k; ++row) {
      for (std::uint32_t col = 0; col < d; ++col) (*mat)(row, col) = r.get<double>();
    }
  }
  r.expect_end();
  validate(m);
  return m;
}

void save_gmm(const GmmModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_gmm(model));
}

GmmModel load_gmm(const std::filesystem::path& path) { return decode_gmm(read_file_bytes(path)); }

}  // namespace loadtex
