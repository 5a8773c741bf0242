#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadtex/descriptor_set.hpp"
#include "loadtex/gmm.hpp"
#include "loadtex/image.hpp"
#include "loadtex/load_descriptor.hpp"
#include "loadtex/manifest.hpp"
#include "loadtex/pca.hpp"

namespace loadtex {

enum class DescriptorKind {
  Load,  // dense LOAD descriptors, Fisher-vector encoded
  Lbp,   // one uniform-LBP histogram per image, fed to the classifier directly
};

struct ExperimentConfig {
  DescriptorKind descriptor = DescriptorKind::Load;
  LoadConfig load;
  int step = 4;
  std::vector<double> pyramid = default_pyramid_factors();
  int pca_dim = 100;
  bool whiten = false;
  int gmm_components = 256;
  std::size_t vocab_size = 100000;
  bool stratified_vocab = false;
  double c_param = 10.0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::filesystem::path cache_dir;

  /// K=256, D=100, 100k vocabulary samples.
  static ExperimentConfig paper();
  /// K=16, D=32, 10k vocabulary samples.
  static ExperimentConfig desk();

  /// ConfigError on inconsistent parameters (checked before any work).
  void validate() const;
  /// Canonical text of every parameter that affects per-image descriptors.
  std::string descriptor_key() const;
  /// Canonical text of every parameter that affects the vocabulary.
  std::string encoder_key() const;
};

/// Cache directory: $LOADTEX_CACHE if set, else ".loadtex_cache".
std::filesystem::path default_cache_dir();

/// Content-addressed artifact store; writes are temp-file-then-rename, so
/// concurrent writers of the same key are safe.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path path(const std::string& kind, const std::string& key,
                             const std::string& ext) const;
  bool contains(const std::string& kind, const std::string& key, const std::string& ext) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Per-image descriptors: dense LOAD (level, row-major order) or a single
/// 59-bin uniform LBP histogram.
DescriptorSet describe_image(const GrayImage& img, const ExperimentConfig& cfg);

struct Vocabulary {
  PcaModel pca;
  GmmModel gmm;
  std::vector<double> log_likelihood;
};

/// Draws up to vocab_size descriptors uniformly without replacement (or an
/// equal quota per class when stratified), seeded.
Eigen::MatrixXd sample_vocabulary(std::span<const DescriptorSet> sets, std::span<const int> labels,
                                  const ExperimentConfig& cfg);

/// PCA then GMM on the sampled descriptors. InsufficientSamples if too few.
Vocabulary fit_vocabulary(std::span<const DescriptorSet> sets, std::span<const int> labels,
                          const ExperimentConfig& cfg);

/// Normalised Fisher vector of one image's descriptors.
Eigen::VectorXd encode_image(const Vocabulary& vocab, const DescriptorSet& descriptors);

struct StageTiming {
  double extraction = 0.0;
  double encoding = 0.0;
  double training = 0.0;
};

struct EvalReport {
  std::string dataset;
  std::vector<std::string> classes;
  std::vector<std::string> splits;
  std::vector<double> accuracy;  // percent, per split
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over splits
  /// confusion[true][predicted], summed over splits.
  std::vector<std::vector<std::size_t>> confusion;
  StageTiming timing;
};

/// Full protocol for every split of the manifest: extract, sample the
/// vocabulary, PCA, GMM, encode, train, predict. Every stage output is
/// cached by content hash under cfg.cache_dir.
EvalReport run_experiment(const DatasetManifest& manifest, const ExperimentConfig& cfg);

/// Deterministic CSV (no timings).
std::string report_csv(const EvalReport& report);
/// Human-readable summary including the confusion matrix (no timings).
std::string report_text(const EvalReport& report);
std::string timing_csv(const StageTiming& timing);

}  // namespace loadtex
