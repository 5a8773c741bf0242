#include "loadtex/pca.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <string>

#include "loadtex/binary_io.hpp"
#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"

namespace loadtex {

namespace {

constexpr std::uint32_t kPcaVersion = 1;
// Eigenvalues below this fraction of the largest count as zero.
constexpr double kRankTolerance = 1e-12;

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw Error(Errc::DegenerateInput, std::string(what) + " contains non-finite values");
}

}  // namespace

PcaModel pca_fit(const Eigen::MatrixXd& samples, int components, bool whiten) {
  const auto n = samples.rows();
  const auto d_in = samples.cols();
  if (components < 1 || components > d_in) {
    throw Error(Errc::ConfigError, "PCA components must lie in [1, " + std::to_string(d_in) + "]");
  }
  if (n <= components) {
    throw Error(Errc::InsufficientSamples, "PCA needs more than " + std::to_string(components) +
                                               " samples, got " + std::to_string(n));
  }
  check_finite(samples, "PCA input");

  PcaModel model;
  model.whiten = whiten;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::NumericalFailure, "covariance eigendecomposition failed");
  }
  // Ascending order from Eigen; walk it backwards.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double largest = std::max(values(d_in - 1), 0.0);
  int kept = 0;
  for (int k = 0; k < components; ++k) {
    if (values(d_in - 1 - k) > kRankTolerance * largest && largest > 0.0) ++kept;
  }
  if (kept == 0) throw Error(Errc::DegenerateInput, "PCA input has zero variance");
  if (kept < components) {
    spdlog::warn("PCA: only {} of {} requested components have non-zero variance; keeping {}",
                 kept, components, kept);
  }

  model.basis.resize(kept, d_in);
  model.eigenvalues.resize(kept);
  for (int k = 0; k < kept; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(d_in - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    model.basis.row(k) = v.transpose();
    model.eigenvalues(k) = values(d_in - 1 - k);
  }
  return model;
}

Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.input_dim()) {
    throw Error(Errc::DimensionMismatch, "PCA input of length " + std::to_string(x.size()) +
                                             ", model expects " +
                                             std::to_string(model.input_dim()));
  }
  Eigen::VectorXd y = model.basis * (x - model.mean);
  if (model.whiten) y = y.cwiseQuotient(model.eigenvalues.cwiseSqrt());
  return y;
}

Eigen::MatrixXd pca_project_rows(const PcaModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.input_dim()) {
    throw Error(Errc::DimensionMismatch, "PCA input of width " + std::to_string(rows.cols()) +
                                             ", model expects " +
                                             std::to_string(model.input_dim()));
  }
  Eigen::MatrixXd y = (rows.rowwise() - model.mean.transpose()) * model.basis.transpose();
  if (model.whiten) {
    y = y.array().rowwise() / model.eigenvalues.cwiseSqrt().transpose().array();
  }
  return y;
}

Eigen::VectorXd pca_backproject(const PcaModel& model, const Eigen::VectorXd& y) {
  if (y.size() != model.output_dim()) {
    throw Error(Errc::DimensionMismatch, "PCA code of wrong length");
  }
  Eigen::VectorXd z = y;
  if (model.whiten) z = z.cwiseProduct(model.eigenvalues.cwiseSqrt());
  return model.basis.transpose() * z + model.mean;
}

std::vector<std::uint8_t> encode_pca(const PcaModel& model) {
  ByteWriter w;
  w.magic("LPCA");
  w.put<std::uint32_t>(kPcaVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.input_dim()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.output_dim()));
  w.put<std::uint32_t>(model.whiten ? 1u : 0u);
  w.put_all<double>({model.mean.data(), static_cast<std::size_t>(model.mean.size())});
  for (Eigen::Index r = 0; r < model.basis.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c) w.put<double>(model.basis(r, c));
  }
  w.put_all<double>({model.eigenvalues.data(), static_cast<std::size_t>(model.eigenvalues.size())});
  return std::move(w.bytes());
}

PcaModel decode_pca(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "PCA model");
  r.expect_magic("LPCA");
  if (const auto v = r.get<std::uint32_t>(); v != kPcaVersion) {
    throw Error(Errc::UnsupportedFormat, "PCA model version " + std::to_string(v));
  }
  const auto d_in = r.get<std::uint32_t>();
  const auto d = r.get<std::uint32_t>();
  const auto flag = r.get<std::uint32_t>();
  if (d == 0 || d > d_in || flag > 1) throw Error(Errc::MalformedFile, "PCA model: bad header");
  if (r.remaining() != sizeof(double) * (static_cast<std::size_t>(d_in) + std::size_t{d} * d_in + d)) {
    throw Error(Errc::MalformedFile, "PCA model: body size mismatch");
  }
  PcaModel model;
  model.whiten = flag == 1;
  model.mean.resize(d_in);
  r.get_all<double>({model.mean.data(), d_in});
  model.basis.resize(d, d_in);
  for (std::uint32_t row = 0; row < d; ++row) {
    for (std::uint32_t col = 0; col < d_in; ++col) model.basis(row, col) = r.get<double>();
  }
  model.eigenvalues.resize(d);
  r.get_all<double>({model.eigenvalues.data(), d});
  r.expect_end();
  return model;
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pca(model));
}

PcaModel load_pca(const std::filesystem::path& path) { return decode_pca(read_file_bytes(path)); }

}  // namespace loadtex
