#include "loadtex/fisher.hpp"

#include <cmath>
#include <string>

#include "loadtex/error.hpp"

namespace loadtex {

Eigen::VectorXd fisher_encode_raw(const GmmModel& model, const Eigen::MatrixXd& descriptors) {
  const Eigen::Index t_count = descriptors.rows();
  if (t_count == 0) throw Error(Errc::EmptyInput, "Fisher encoding of an empty descriptor set");
  const int d = model.dimension();
  const int k_count = model.components();
  if (descriptors.cols() != d) {
    throw Error(Errc::DimensionMismatch, "descriptors of width " +
                                             std::to_string(descriptors.cols()) +
                                             ", GMM dimension " + std::to_string(d));
  }

  // Accumulate sum_t gamma_tk * z and sum_t gamma_tk * (z^2 - 1), z = (x - mu) / sigma.
  Eigen::MatrixXd mean_part = Eigen::MatrixXd::Zero(k_count, d);
  Eigen::MatrixXd var_part = Eigen::MatrixXd::Zero(k_count, d);
  const Eigen::ArrayXXd inv_sigma = model.sigmas.array().inverse();
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const Eigen::VectorXd x = descriptors.row(t).transpose();
    const Eigen::VectorXd gamma = posterior(model, x);
    for (int k = 0; k < k_count; ++k) {
      const double g = gamma(k);
      if (g == 0.0) continue;
      const Eigen::ArrayXd z =
          (x.transpose().array() - model.means.row(k).array()) * inv_sigma.row(k);
      mean_part.row(k).array() += g * z.transpose();
      var_part.row(k).array() += g * (z.square() - 1.0).transpose();
    }
  }

  Eigen::VectorXd fv(2 * static_cast<Eigen::Index>(d) * k_count);
  const double inv_t = 1.0 / static_cast<double>(t_count);
  for (int k = 0; k < k_count; ++k) {
    const double mean_scale = inv_t / std::sqrt(model.priors(k));
    const double var_scale = inv_t / std::sqrt(2.0 * model.priors(k));
    fv.segment(2 * d * k, d) = mean_part.row(k).transpose() * mean_scale;
    fv.segment(2 * d * k + d, d) = var_part.row(k).transpose() * var_scale;
  }
  return fv;
}

Eigen::VectorXd fisher_encode(const GmmModel& model, const Eigen::MatrixXd& descriptors) {
  return power_l2_normalize(fisher_encode_raw(model, descriptors));
}

Eigen::VectorXd power_l2_normalize(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = v.unaryExpr([](double x) {
    return x < 0.0 ? -std::sqrt(-x) : std::sqrt(x);
  });
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
  return out;
}

}  // namespace loadtex
