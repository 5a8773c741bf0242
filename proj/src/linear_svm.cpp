#include "loadtex/linear_svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "loadtex/binary_io.hpp"
#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"
#include "loadtex/parallel.hpp"

namespace loadtex {

namespace {

constexpr std::uint32_t kSvmVersion = 1;

struct BinaryResult {
  Eigen::VectorXd w;
  double b = 0.0;
  BinaryTrace trace;
};

// Hinge-loss dual coordinate descent on the augmented features [x, 1].
BinaryResult solve_binary(const Eigen::MatrixXd& x, const std::vector<double>& y,
                          std::uint64_t seed, const SvmOptions& opt) {
  const Eigen::Index n = x.rows();
  const double c = opt.c_param;
  BinaryResult r;
  r.w = Eigen::VectorXd::Zero(x.cols());
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  Eigen::VectorXd q = x.rowwise().squaredNorm();
  q.array() += 1.0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);

  auto objectives = [&](double& primal, double& dual) {
    const double reg = 0.5 * (r.w.squaredNorm() + r.b * r.b);
    const Eigen::VectorXd margins = x * r.w;
    double hinge = 0.0;
    double alpha_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * (margins(i) + r.b));
      alpha_sum += alpha[static_cast<std::size_t>(i)];
    }
    primal = reg + c * hinge;
    dual = alpha_sum - reg;
  };

  for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const Eigen::Index i : order) {
      const auto si = static_cast<std::size_t>(i);
      const double grad = y[si] * (x.row(i).dot(r.w) + r.b) - 1.0;
      double projected = grad;
      if (alpha[si] <= 0.0) projected = std::min(grad, 0.0);
      else if (alpha[si] >= c) projected = std::max(grad, 0.0);
      if (projected == 0.0) continue;
      const double updated = std::clamp(alpha[si] - grad / q(i), 0.0, c);
      const double delta = (updated - alpha[si]) * y[si];
      alpha[si] = updated;
      r.w += delta * x.row(i).transpose();
      r.b += delta;
    }
    objectives(r.trace.primal, r.trace.dual);
    r.trace.dual_objective.push_back(r.trace.dual);
    r.trace.epochs = epoch + 1;
    if (r.trace.primal - r.trace.dual <= opt.tolerance * std::abs(r.trace.primal)) break;
  }
  return r;
}

}  // namespace

SvmFit train(const Eigen::MatrixXd& features, std::span<const int> labels,
             const std::vector<std::string>& classes, std::uint64_t seed,
             const SvmOptions& options) {
  const auto n = features.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw Error(Errc::DimensionMismatch, "feature rows and labels differ in count");
  }
  if (n < 2) throw Error(Errc::InsufficientSamples, "SVM training needs at least 2 samples");
  if (classes.size() < 2) throw Error(Errc::DegenerateLabels, "SVM training needs at least 2 classes");
  if (!(options.c_param > 0.0)) throw Error(Errc::ConfigError, "SVM C must be positive");
  if (!features.allFinite()) throw Error(Errc::DegenerateInput, "SVM features must be finite");
  std::vector<int> per_class(classes.size(), 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes.size()) {
      throw Error(Errc::DimensionMismatch, "label index out of range");
    }
    ++per_class[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (per_class[c] == 0) throw Error(Errc::DegenerateLabels, "class '" + classes[c] + "' has no samples");
  }

  SvmFit fit;
  fit.model.classes = classes;
  fit.model.c_param = options.c_param;
  fit.model.weights.resize(static_cast<Eigen::Index>(classes.size()), features.cols());
  fit.model.biases.resize(static_cast<Eigen::Index>(classes.size()));
  fit.traces.resize(classes.size());
  std::vector<BinaryResult> results(classes.size());
  parallel_for(classes.size(), options.threads, [&](std::size_t c) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
    results[c] = solve_binary(features, y, seed + 0x9E3779B97F4A7C15ULL * (c + 1), options);
  });
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto row = static_cast<Eigen::Index>(c);
    fit.model.weights.row(row) = results[c].w.transpose();
    fit.model.biases(row) = results[c].b;
    fit.traces[c] = std::move(results[c].trace);
  }
  return fit;
}

Prediction predict(const LinearModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.feature_dim()) {
    throw Error(Errc::DimensionMismatch, "feature of length " + std::to_string(x.size()) +
                                             ", model expects " +
                                             std::to_string(model.feature_dim()));
  }
  Prediction p;
  p.scores = model.weights * x + model.biases;
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < p.scores.size(); ++c) {
    if (p.scores(c) > p.scores(best)) best = c;
  }
  p.label = static_cast<int>(best);
  return p;
}

std::vector<std::uint8_t> encode_linear_model(const LinearModel& model) {
  ByteWriter w;
  w.magic("LSVM");
  w.put<std::uint32_t>(kSvmVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.weights.rows()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.weights.cols()));
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) w.put<double>(model.weights(r, c));
  }
  for (Eigen::Index r = 0; r < model.biases.size(); ++r) w.put<double>(model.biases(r));
  return std::move(w.bytes());
}

LinearModel decode_linear_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "linear model");
  r.expect_magic("LSVM");
  if (const auto v = r.get<std::uint32_t>(); v != kSvmVersion) {
    throw Error(Errc::UnsupportedFormat, "linear model version " + std::to_string(v));
  }
  const auto c = r.get<std::uint32_t>();
  const auto f = r.get<std::uint32_t>();
  if (c == 0 || f == 0) throw Error(Errc::MalformedFile, "linear model: zero dimension");
  if (r.remaining() != sizeof(double) * (std::size_t{c} * f + c)) {
    throw Error(Errc::MalformedFile, "linear model: body size mismatch");
  }
  LinearModel m;
  m.weights.resize(c, f);
  for (std::uint32_t row = 0; row < c; ++row) {
    for (std::uint32_t col = 0; col < f; ++col) m.weights(row, col) = r.get<double>();
  }
  m.biases.resize(c);
  r.get_all<double>({m.biases.data(), c});
  r.expect_end();
  // The training C is not part of the file format.
  m.c_param = 0.0;
  for (std::uint32_t i = 0; i < c; ++i) m.classes.push_back("class" + std::to_string(i));
  return m;
}

std::filesystem::path labels_sidecar(const std::filesystem::path& model_path) {
  auto p = model_path;
  p += ".labels";
  return p;
}

void save_linear_model(const LinearModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_linear_model(model));
  std::string text;
  for (const auto& name : model.classes) text += name + "\n";
  write_file_atomic(labels_sidecar(path),
                    {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

LinearModel load_linear_model(const std::filesystem::path& path) {
  LinearModel m = decode_linear_model(read_file_bytes(path));
  std::ifstream in(labels_sidecar(path));
  if (!in) throw Error(Errc::MissingFile, labels_sidecar(path).string());
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) names.push_back(line);
  }
  if (names.size() != m.classes.size()) {
    throw Error(Errc::MalformedFile, labels_sidecar(path).string() + ": expected " +
                                         std::to_string(m.classes.size()) + " labels");
  }
  m.classes = std::move(names);
  return m;
}

}  // namespace loadtex
