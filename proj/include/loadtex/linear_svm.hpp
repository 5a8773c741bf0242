#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace loadtex {

/// One-vs-all linear classifier: score_c(x) = w_c . x + b_c.
struct LinearModel {
  std::vector<std::string> classes;
  Eigen::MatrixXd weights;  // C x F
  Eigen::VectorXd biases;   // C
  double c_param = 10.0;

  int feature_dim() const noexcept { return static_cast<int>(weights.cols()); }
};

struct SvmOptions {
  double c_param = 10.0;
  /// Stop when (primal - dual) <= tolerance * |primal|.
  double tolerance = 1e-4;
  int max_epochs = 2000;
  int threads = 1;
};

/// Diagnostics of one binary sub-problem.
struct BinaryTrace {
  std::vector<double> dual_objective;  // after every epoch
  double primal = 0.0;
  double dual = 0.0;
  int epochs = 0;
};

struct SvmFit {
  LinearModel model;
  std::vector<BinaryTrace> traces;  // one per class
};

/// L2-regularised hinge-loss SVM per class (class c against the rest),
/// solved by dual coordinate descent with the bias as an extra constant
/// feature. Epoch order comes from a generator seeded with `seed`, so the
/// result is deterministic and independent of `options.threads`.
/// `labels[i]` indexes `classes`. DegenerateLabels for a single class or an
/// empty class; DimensionMismatch for inconsistent sizes.
SvmFit train(const Eigen::MatrixXd& features, std::span<const int> labels,
             const std::vector<std::string>& classes, std::uint64_t seed,
             const SvmOptions& options = {});

struct Prediction {
  int label = 0;
  Eigen::VectorXd scores;
};

/// argmax of the class scores; ties go to the earlier class.
Prediction predict(const LinearModel& model, const Eigen::VectorXd& x);

// "LSVM": magic, u32 version, u32 C, u32 F, then f64 weights (C x F,
// row-major) and biases (C). Class names live in a "<path>.labels" sidecar.
std::vector<std::uint8_t> encode_linear_model(const LinearModel& model);
LinearModel decode_linear_model(std::span<const std::uint8_t> bytes);
void save_linear_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_linear_model(const std::filesystem::path& path);
std::filesystem::path labels_sidecar(const std::filesystem::path& model_path);

}  // namespace loadtex
