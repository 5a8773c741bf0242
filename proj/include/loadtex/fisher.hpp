#pragma once

#include <Eigen/Dense>

#include "loadtex/gmm.hpp"

namespace loadtex {

/// Averaged per-descriptor Fisher scores, 2*D*K values. Component k occupies
/// [2Dk, 2D(k+1)): first the mean block
///   gamma_tk / sqrt(pi_k) * (x_t - mu_k) / sigma_k
/// then the variance block
///   gamma_tk / sqrt(2 pi_k) * ((x_t - mu_k)^2 / sigma_k^2 - 1),
/// each averaged over the T rows of `descriptors`. EmptyInput if T == 0.
Eigen::VectorXd fisher_encode_raw(const GmmModel& model, const Eigen::MatrixXd& descriptors);

/// fisher_encode_raw followed by power_l2_normalize.
Eigen::VectorXd fisher_encode(const GmmModel& model, const Eigen::MatrixXd& descriptors);

/// sign(v) * sqrt(|v|) element-wise, then unit L2 norm; zero stays zero.
Eigen::VectorXd power_l2_normalize(const Eigen::VectorXd& v);

}  // namespace loadtex
