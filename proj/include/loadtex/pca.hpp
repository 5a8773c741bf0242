#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace loadtex {

struct PcaModel {
  Eigen::VectorXd mean;         // D_in
  Eigen::MatrixXd basis;        // D x D_in, orthonormal rows, eigenvalue-descending
  Eigen::VectorXd eigenvalues;  // D
  bool whiten = false;

  int input_dim() const noexcept { return static_cast<int>(basis.cols()); }
  int output_dim() const noexcept { return static_cast<int>(basis.rows()); }
};

/// Top-`components` eigenvectors of the sample covariance of the rows of
/// `samples` (N x D_in). Each basis row is sign-fixed so that its
/// largest-magnitude entry is positive. If fewer than `components`
/// eigenvalues are non-zero the model keeps only those and logs a warning.
/// InsufficientSamples unless N > components.
PcaModel pca_fit(const Eigen::MatrixXd& samples, int components, bool whiten = false);

/// basis * (x - mean), divided by sqrt(eigenvalue) when whitening.
Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x);
/// Row-wise projection of an N x D_in matrix.
Eigen::MatrixXd pca_project_rows(const PcaModel& model, const Eigen::MatrixXd& rows);
/// Inverse of pca_project on the retained subspace.
Eigen::VectorXd pca_backproject(const PcaModel& model, const Eigen::VectorXd& y);

// "LPCA": magic, u32 version, u32 D_in, u32 D, u32 whiten flag, then f64
// mean (D_in), basis (D x D_in, row-major) and eigenvalues (D).
std::vector<std::uint8_t> encode_pca(const PcaModel& model);
PcaModel decode_pca(std::span<const std::uint8_t> bytes);
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace loadtex
