#include "loadtex/experiment.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <ranges>
#include <sstream>

#include "loadtex/binary_io.hpp"
#include "loadtex/binary_patterns.hpp"
#include "loadtex/error.hpp"
#include "loadtex/fisher.hpp"
#include "loadtex/hash.hpp"
#include "loadtex/image_io.hpp"
#include "loadtex/linear_svm.hpp"
#include "loadtex/parallel.hpp"

namespace loadtex {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + exact(values[i]);
  return out;
}

// Per-set row indices of the vocabulary sample, ascending within each set.
std::vector<std::vector<std::size_t>> choose_rows(std::span<const std::size_t> counts,
                                                  std::span<const int> labels,
                                                  const ExperimentConfig& cfg) {
  std::vector<std::vector<std::size_t>> rows(counts.size());
  std::vector<std::size_t> offsets(counts.size() + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), offsets.begin() + 1);
  std::mt19937_64 rng(cfg.seed ^ 0x5EEDF00DULL);

  auto take = [&](const std::vector<std::size_t>& set_ids, std::size_t quota) {
    std::size_t total = 0;
    for (std::size_t s : set_ids) total += counts[s];
    std::vector<std::size_t> picks;
    if (total <= quota) {
      if (total < quota) {
        spdlog::warn("vocabulary: only {} descriptors available for {} requested; using all",
                     total, quota);
      }
      picks.resize(total);
      std::iota(picks.begin(), picks.end(), std::size_t{0});
    } else {
      picks.resize(quota);
      std::ranges::sample(std::views::iota(std::size_t{0}, total), picks.begin(),
                          static_cast<std::ptrdiff_t>(quota), rng);
      std::sort(picks.begin(), picks.end());
    }
    // Map positions within the concatenation of set_ids back to (set, row).
    std::size_t cursor = 0;
    std::size_t base = 0;
    for (std::size_t p : picks) {
      while (p >= base + counts[set_ids[cursor]]) base += counts[set_ids[cursor++]];
      rows[set_ids[cursor]].push_back(p - base);
    }
  };

  if (!cfg.stratified_vocab) {
    std::vector<std::size_t> all(counts.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    take(all, cfg.vocab_size);
  } else {
    const int n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    for (int c = 0; c < n_classes; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t s = 0; s < labels.size(); ++s) {
        if (labels[s] == c) members.push_back(s);
      }
      if (!members.empty()) take(members, cfg.vocab_size / static_cast<std::size_t>(n_classes));
    }
  }
  return rows;
}

Eigen::MatrixXd to_matrix(const DescriptorSet& set) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(set.count()), set.dimension);
  for (std::size_t r = 0; r < set.count(); ++r) {
    const auto row = set.row(r);
    for (std::uint32_t c = 0; c < set.dimension; ++c) m(static_cast<Eigen::Index>(r), c) = row[c];
  }
  return m;
}

DescriptorSet to_set(const Eigen::VectorXd& v) {
  DescriptorSet s(static_cast<std::uint32_t>(v.size()));
  s.values.resize(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) s.values[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
  return s;
}

std::size_t descriptor_file_count(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint8_t header[20];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw Error(Errc::MalformedFile, path.string() + ": truncated header");
  }
  ByteReader r(header, path.string());
  r.expect_magic("LODF");
  r.get<std::uint32_t>();
  return static_cast<std::size_t>(r.get<std::uint64_t>());
}

Vocabulary fit_on_sample(const Eigen::MatrixXd& sample, const ExperimentConfig& cfg) {
  if (sample.rows() <= cfg.pca_dim) {
    throw Error(Errc::InsufficientSamples, "vocabulary sample of " + std::to_string(sample.rows()) +
                                               " descriptors for " + std::to_string(cfg.pca_dim) +
                                               " PCA components");
  }
  Vocabulary v;
  v.pca = pca_fit(sample, cfg.pca_dim, cfg.whiten);
  const Eigen::MatrixXd projected = pca_project_rows(v.pca, sample);
  GmmOptions opts;
  opts.threads = cfg.threads;
  GmmFit fit = gmm_fit(projected, cfg.gmm_components, cfg.seed, opts);
  v.gmm = std::move(fit.model);
  v.log_likelihood = std::move(fit.log_likelihood);
  return v;
}

std::string stage_error(const std::string& stage, const std::string& item, const Error& e) {
  return stage + " [" + item + "]: " + e.what();
}

template <typename Fn>
auto with_stage(const std::string& stage, const std::string& item, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), stage_error(stage, item, e));
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::paper() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::desk() {
  ExperimentConfig cfg;
  cfg.pca_dim = 32;
  cfg.gmm_components = 16;
  cfg.vocab_size = 10000;
  return cfg;
}

void ExperimentConfig::validate() const {
  load.validate();
  if (step < 1) throw Error(Errc::ConfigError, "step must be >= 1");
  if (pyramid.empty()) throw Error(Errc::ConfigError, "at least one pyramid factor is required");
  for (double f : pyramid) {
    if (!(f > 0.0) || !std::isfinite(f)) throw Error(Errc::ConfigError, "pyramid factors must be positive");
  }
  if (descriptor == DescriptorKind::Load) {
    if (pca_dim < 1 || static_cast<std::uint32_t>(pca_dim) > load.dimension()) {
      throw Error(Errc::ConfigError, "PCA dimension " + std::to_string(pca_dim) +
                                         " must lie in [1, " + std::to_string(load.dimension()) + "]");
    }
    if (gmm_components < 1) throw Error(Errc::ConfigError, "GMM needs at least one component");
    if (vocab_size <= static_cast<std::size_t>(pca_dim)) {
      throw Error(Errc::ConfigError, "vocabulary size must exceed the PCA dimension");
    }
  }
  if (!(c_param > 0.0)) throw Error(Errc::ConfigError, "C must be positive");
}

std::string ExperimentConfig::descriptor_key() const {
  if (descriptor == DescriptorKind::Lbp) return "lbp-hist;P=8;R=1;v1";
  return "load;scales=" + join(load.scales) + ";patch=" + exact(load.patch_radius) +
         ";adaptive=" + std::to_string(load.adaptive) + ";step=" + std::to_string(step) +
         ";pyramid=" + join(pyramid) + ";v2";
}

std::string ExperimentConfig::encoder_key() const {
  return "pca=" + std::to_string(pca_dim) + ";whiten=" + std::to_string(whiten) +
         ";K=" + std::to_string(gmm_components) + ";vocab=" + std::to_string(vocab_size) +
         ";stratified=" + std::to_string(stratified_vocab) + ";seed=" + std::to_string(seed) + ";v1";
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("LOADTEX_CACHE"); env != nullptr && *env != '\0') return env;
  return ".loadtex_cache";
}

std::filesystem::path ArtifactCache::path(const std::string& kind, const std::string& key,
                                          const std::string& ext) const {
  return dir_ / kind / (key + ext);
}

bool ArtifactCache::contains(const std::string& kind, const std::string& key,
                             const std::string& ext) const {
  return std::filesystem::exists(path(kind, key, ext));
}

DescriptorSet describe_image(const GrayImage& img, const ExperimentConfig& cfg) {
  if (cfg.descriptor == DescriptorKind::Lbp) {
    const auto hist = lbp_histogram(img, PatternConfig{});
    DescriptorSet s(kUniformBins);
    for (double h : hist) s.values.push_back(static_cast<float>(h));
    return s;
  }
  return extract_dense(img, cfg.load, cfg.step, cfg.pyramid);
}

Eigen::MatrixXd sample_vocabulary(std::span<const DescriptorSet> sets, std::span<const int> labels,
                                  const ExperimentConfig& cfg) {
  std::vector<std::size_t> counts;
  for (const auto& s : sets) counts.push_back(s.count());
  const auto rows = choose_rows(counts, labels, cfg);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  const std::uint32_t dim = sets.empty() ? 0 : sets.front().dimension;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(total), dim);
  Eigen::Index next = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t r : rows[s]) {
      const auto row = sets[s].row(r);
      for (std::uint32_t c = 0; c < dim; ++c) out(next, c) = row[c];
      ++next;
    }
  }
  return out;
}

Vocabulary fit_vocabulary(std::span<const DescriptorSet> sets, std::span<const int> labels,
                          const ExperimentConfig& cfg) {
  return fit_on_sample(sample_vocabulary(sets, labels, cfg), cfg);
}

Eigen::VectorXd encode_image(const Vocabulary& vocab, const DescriptorSet& descriptors) {
  return fisher_encode(vocab.gmm, pca_project_rows(vocab.pca, to_matrix(descriptors)));
}

EvalReport run_experiment(const DatasetManifest& manifest, const ExperimentConfig& cfg) {
  cfg.validate();
  validate_manifest(manifest, true);
  const auto splits = manifest.splits();
  if (splits.empty()) throw Error(Errc::ConfigError, "manifest '" + manifest.name + "' defines no splits");
  const ArtifactCache cache(cfg.cache_dir.empty() ? default_cache_dir() : cfg.cache_dir);
  const bool use_fv = cfg.descriptor == DescriptorKind::Load;

  EvalReport report;
  report.dataset = manifest.name;
  report.classes = manifest.classes;
  report.confusion.assign(manifest.classes.size(), std::vector<std::size_t>(manifest.classes.size(), 0));

  // Stage 1: per-image descriptors.
  const std::size_t n = manifest.entries.size();
  std::vector<std::string> desc_key(n);
  std::vector<std::size_t> desc_count(n, 0);
  const std::string descriptor_key = cfg.descriptor_key();
  auto t0 = Clock::now();
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < n; ++i) {
    if (!manifest.entries[i].tags.empty()) used.push_back(i);
  }
  spdlog::info("extract: {} images ({})", used.size(), descriptor_key);
  parallel_for(used.size(), cfg.threads, [&](std::size_t u) {
    const std::size_t i = used[u];
    const auto path = manifest.resolve(manifest.entries[i]);
    with_stage("extract", path.string(), [&] {
      const auto bytes = read_file_bytes(path);
      desc_key[i] = Sha256().update(bytes).update("\n").update(descriptor_key).hex();
      const auto file = cache.path("descriptors", desc_key[i], ".lodf");
      if (std::filesystem::exists(file)) {
        desc_count[i] = descriptor_file_count(file);
      } else {
        const GrayImage img = decode_image(bytes, detect_format(bytes));
        const DescriptorSet set = describe_image(img, cfg);
        desc_count[i] = set.count();
        write_descriptor_file(file, set);
      }
      return 0;
    });
  });
  report.timing.extraction = seconds_since(t0);

  for (const auto& split : splits) {
    const auto train_ids = manifest.entries_for(split, SplitRole::Train);
    const auto test_ids = manifest.entries_for(split, SplitRole::Test);
    std::vector<int> train_labels;
    for (std::size_t i : train_ids) train_labels.push_back(manifest.class_index(manifest.entries[i].label));

    // Stage 2: vocabulary (LOAD only).
    std::string vocab_key;
    Vocabulary vocab;
    if (use_fv) {
      t0 = Clock::now();
      Sha256 h;
      h.update(cfg.encoder_key());
      for (std::size_t i : train_ids) h.update("\n").update(desc_key[i]).update(manifest.entries[i].label);
      vocab_key = h.hex();
      const auto pca_file = cache.path("vocab", vocab_key, ".lpca");
      const auto gmm_file = cache.path("vocab", vocab_key, ".lgmm");
      if (std::filesystem::exists(pca_file) && std::filesystem::exists(gmm_file)) {
        vocab.pca = load_pca(pca_file);
        vocab.gmm = load_gmm(gmm_file);
      } else {
        vocab = with_stage("fit", split, [&] {
          std::vector<std::size_t> counts;
          for (std::size_t i : train_ids) counts.push_back(desc_count[i]);
          const auto rows = choose_rows(counts, train_labels, cfg);
          std::size_t total = 0;
          for (const auto& r : rows) total += r.size();
          Eigen::MatrixXd sample(static_cast<Eigen::Index>(total), cfg.load.dimension());
          Eigen::Index next = 0;
          for (std::size_t s = 0; s < train_ids.size(); ++s) {
            if (rows[s].empty()) continue;
            const auto set = read_descriptor_file(cache.path("descriptors", desc_key[train_ids[s]], ".lodf"));
            for (std::size_t r : rows[s]) {
              const auto row = set.row(r);
              for (std::uint32_t c = 0; c < set.dimension; ++c) sample(next, c) = row[c];
              ++next;
            }
          }
          spdlog::info("fit [{}]: PCA {} -> {}, GMM K={} on {} descriptors", split,
                       cfg.load.dimension(), cfg.pca_dim, cfg.gmm_components, total);
          return fit_on_sample(sample, cfg);
        });
        save_pca(vocab.pca, pca_file);
        save_gmm(vocab.gmm, gmm_file);
        if (!vocab.log_likelihood.empty()) {
          spdlog::info("fit [{}]: final EM log-likelihood {:.6f} after {} evaluations", split,
                       vocab.log_likelihood.back(), vocab.log_likelihood.size());
        }
      }
      report.timing.training += seconds_since(t0);
    }

    // Stage 3: image-level features.
    t0 = Clock::now();
    std::vector<std::size_t> members = train_ids;
    members.insert(members.end(), test_ids.begin(), test_ids.end());
    std::vector<std::string> feature_key(members.size());
    std::vector<Eigen::VectorXd> features(members.size());
    parallel_for(members.size(), cfg.threads, [&](std::size_t m) {
      const std::size_t i = members[m];
      with_stage("encode", manifest.entries[i].path, [&] {
        const auto desc_file = cache.path("descriptors", desc_key[i], ".lodf");
        if (!use_fv) {
          feature_key[m] = desc_key[i];
          const auto set = read_descriptor_file(desc_file);
          features[m] = to_matrix(set).row(0).transpose();
          return 0;
        }
        feature_key[m] = sha256_hex(desc_key[i] + "\n" + vocab_key);
        const auto fv_file = cache.path("fv", feature_key[m], ".lodf");
        if (std::filesystem::exists(fv_file)) {
          features[m] = to_matrix(read_descriptor_file(fv_file)).row(0).transpose();
        } else {
          const Eigen::VectorXd fv = encode_image(vocab, read_descriptor_file(desc_file));
          const DescriptorSet stored = to_set(fv);
          write_descriptor_file(fv_file, stored);
          // Use the stored (float) precision so cold and warm runs agree.
          features[m] = to_matrix(stored).row(0).transpose();
        }
        return 0;
      });
    });
    report.timing.encoding += seconds_since(t0);

    // Stage 4: classifier.
    t0 = Clock::now();
    const auto feature_dim = features.front().size();
    Eigen::MatrixXd train_x(static_cast<Eigen::Index>(train_ids.size()), feature_dim);
    Sha256 svm_hash;
    svm_hash.update("C=" + exact(cfg.c_param) + ";seed=" + std::to_string(cfg.seed) + ";v1");
    for (std::size_t s = 0; s < train_ids.size(); ++s) {
      train_x.row(static_cast<Eigen::Index>(s)) = features[s].transpose();
      svm_hash.update("\n").update(feature_key[s]).update(manifest.entries[train_ids[s]].label);
    }
    const std::string svm_key = svm_hash.hex();
    const auto svm_file = cache.path("svm", svm_key, ".lsvm");
    LinearModel model;
    if (std::filesystem::exists(svm_file) && std::filesystem::exists(labels_sidecar(svm_file))) {
      model = load_linear_model(svm_file);
    } else {
      model = with_stage("train", split, [&] {
        SvmOptions opts;
        opts.c_param = cfg.c_param;
        opts.threads = cfg.threads;
        return train(train_x, train_labels, manifest.classes, cfg.seed, opts).model;
      });
      save_linear_model(model, svm_file);
    }
    report.timing.training += seconds_since(t0);

    std::size_t correct = 0;
    for (std::size_t s = 0; s < test_ids.size(); ++s) {
      const int truth = manifest.class_index(manifest.entries[test_ids[s]].label);
      const int guess = predict(model, features[train_ids.size() + s]).label;
      ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(guess)];
      if (truth == guess) ++correct;
    }
    const double acc = 100.0 * static_cast<double>(correct) / static_cast<double>(test_ids.size());
    spdlog::info("eval [{}]: {:.1f}% ({} / {})", split, acc, correct, test_ids.size());
    report.splits.push_back(split);
    report.accuracy.push_back(acc);
  }

  const double k = static_cast<double>(report.accuracy.size());
  report.mean = std::accumulate(report.accuracy.begin(), report.accuracy.end(), 0.0) / k;
  double ss = 0.0;
  for (double a : report.accuracy) ss += (a - report.mean) * (a - report.mean);
  report.stddev = report.accuracy.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "split,accuracy_percent\n";
  char buf[64];
  for (std::size_t i = 0; i < report.splits.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.4f", report.accuracy[i]);
    out << report.splits[i] << "," << buf << "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.4f", report.mean);
  out << "mean," << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.4f", report.stddev);
  out << "std," << buf << "\n";
  out << "\ntrue\\predicted";
  for (const auto& c : report.classes) out << "," << c;
  out << "\n";
  for (std::size_t r = 0; r < report.classes.size(); ++r) {
    out << report.classes[r];
    for (std::size_t v : report.confusion[r]) out << "," << v;
    out << "\n";
  }
  return out.str();
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  char buf[96];
  out << "dataset: " << report.dataset << "\n";
  for (std::size_t i = 0; i < report.splits.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "  %-12s %6.1f%%\n", report.splits[i].c_str(), report.accuracy[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "accuracy: %.1f%% +- %.1f%% over %zu split(s)\n", report.mean,
                report.stddev, report.splits.size());
  out << buf << "confusion (rows: true, columns: predicted)\n";
  std::size_t width = 6;
  for (const auto& c : report.classes) width = std::max(width, c.size() + 1);
  out << std::string(width, ' ');
  for (const auto& c : report.classes) out << std::string(width - c.size(), ' ') << c;
  out << "\n";
  for (std::size_t r = 0; r < report.classes.size(); ++r) {
    out << report.classes[r] << std::string(width - report.classes[r].size(), ' ');
    for (std::size_t v : report.confusion[r]) {
      const std::string s = std::to_string(v);
      out << std::string(width - s.size(), ' ') << s;
    }
    out << "\n";
  }
  return out.str();
}

std::string timing_csv(const StageTiming& timing) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "stage,seconds\nextraction,%.3f\nencoding,%.3f\ntraining,%.3f\n",
                timing.extraction, timing.encoding, timing.training);
  return buf;
}

}  // namespace loadtex
