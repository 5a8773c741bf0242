// loadtex: command-line front end for descriptor extraction, vocabulary
// fitting, Fisher-vector encoding, classifier training, evaluation and
// benchmarking.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "loadtex/bench.hpp"
#include "loadtex/error.hpp"
#include "loadtex/experiment.hpp"
#include "loadtex/fisher.hpp"
#include "loadtex/image_io.hpp"
#include "loadtex/linear_svm.hpp"
#include "loadtex/manifest.hpp"
#include "loadtex/parallel.hpp"
#include "loadtex/synth.hpp"

namespace fs = std::filesystem;
using namespace loadtex;

namespace {

constexpr int kExitStage = 1;
constexpr int kExitUsage = 2;

// Flags shared by every subcommand. Defaults are the paper profile; the desk
// profile replaces only the values that were not given explicitly.
struct Shared {
  std::string profile = "paper";
  std::string descriptor = "load";
  int threads = 0;
  std::uint64_t seed = 0;
  std::string cache;
  std::string config_file;
  std::vector<double> scales{1, 2, 3, 4};
  double patch_radius = 15.0;
  int step = 4;
  std::vector<double> pyramid = default_pyramid_factors();
  bool fixed_frame = false;
  int pca_dim = 100;
  int gmm_components = 256;
  std::size_t vocab_size = 100000;
  bool whiten = false;
  bool stratified = false;
  double c_param = 10.0;
  bool verbose = false;
  bool quiet = false;
};

struct SharedOptions {
  CLI::Option* scales = nullptr;
  CLI::Option* patch_radius = nullptr;
  CLI::Option* step = nullptr;
  CLI::Option* pyramid = nullptr;
  CLI::Option* pca_dim = nullptr;
  CLI::Option* gmm_components = nullptr;
  CLI::Option* vocab_size = nullptr;
  CLI::Option* c_param = nullptr;
};

SharedOptions add_shared(CLI::App& app, Shared& s) {
  SharedOptions o;
  app.add_option("--profile", s.profile, "Parameter profile")
      ->check(CLI::IsMember({"paper", "desk"}))
      ->capture_default_str();
  app.add_option("--descriptor", s.descriptor, "load: dense LOAD + Fisher vectors; lbp: one uniform LBP histogram")
      ->check(CLI::IsMember({"load", "lbp"}))
      ->capture_default_str();
  app.add_option("--threads", s.threads, "Worker threads (0 = all logical cores)")->capture_default_str();
  app.add_option("--seed", s.seed, "Random seed")->capture_default_str();
  app.add_option("--cache", s.cache, "Artifact cache directory (default $LOADTEX_CACHE or .loadtex_cache)");
  app.add_option("--config", s.config_file, "key=value file; command-line flags take precedence")
      ->check(CLI::ExistingFile);
  o.scales = app.add_option("--scales", s.scales, "Ring radii")->delimiter(',')->capture_default_str();
  o.patch_radius = app.add_option("--patch-radius", s.patch_radius, "Patch radius in pixels")->capture_default_str();
  o.step = app.add_option("--step", s.step, "Dense grid step in pixels")->capture_default_str();
  o.pyramid = app.add_option("--pyramid", s.pyramid, "Pyramid scale factors")->delimiter(',')->capture_default_str();
  app.add_flag("--fixed-frame", s.fixed_frame, "Use the image frame instead of the adaptive one");
  o.pca_dim = app.add_option("--pca-dim", s.pca_dim, "PCA output dimension (desk: 32)")->capture_default_str();
  o.gmm_components = app.add_option("--gmm-components", s.gmm_components, "GMM components (desk: 16)")->capture_default_str();
  o.vocab_size = app.add_option("--vocab-size", s.vocab_size, "Descriptors sampled for PCA/GMM (desk: 10000)")->capture_default_str();
  app.add_flag("--whiten", s.whiten, "Whiten PCA output");
  app.add_flag("--stratified", s.stratified, "Equal vocabulary quota per class");
  o.c_param = app.add_option("--C", s.c_param, "SVM regularisation constant")->capture_default_str();
  app.add_flag("-v,--verbose", s.verbose, "Debug logging");
  app.add_flag("-q,--quiet", s.quiet, "Warnings and errors only");
  return o;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

// Applies key=value lines to options of `app` that were not given on the
// command line.
void apply_config_file(CLI::App& app, const std::string& path) {
  std::ifstream in(path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::ConfigError, path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw Error(Errc::ConfigError, path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      opt->add_result(value == "true" || value == "1" || value == "yes" ? "true" : "false");
    } else {
      std::stringstream parts(value);
      std::string part;
      while (std::getline(parts, part, ',')) opt->add_result(trim(part));
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(Errc::ConfigError, path + ": " + key + ": " + e.what());
    }
  }
}

ExperimentConfig build_config(const Shared& s, const SharedOptions& o) {
  ExperimentConfig cfg = s.profile == "desk" ? ExperimentConfig::desk() : ExperimentConfig::paper();
  cfg.descriptor = s.descriptor == "lbp" ? DescriptorKind::Lbp : DescriptorKind::Load;
  if (o.scales->count() > 0) cfg.load.scales = s.scales;
  if (o.patch_radius->count() > 0) cfg.load.patch_radius = s.patch_radius;
  if (o.step->count() > 0) cfg.step = s.step;
  if (o.pyramid->count() > 0) cfg.pyramid = s.pyramid;
  if (o.pca_dim->count() > 0) cfg.pca_dim = s.pca_dim;
  if (o.gmm_components->count() > 0) cfg.gmm_components = s.gmm_components;
  if (o.vocab_size->count() > 0) cfg.vocab_size = s.vocab_size;
  if (o.c_param->count() > 0) cfg.c_param = s.c_param;
  cfg.load.adaptive = !s.fixed_frame;
  cfg.whiten = s.whiten;
  cfg.stratified_vocab = s.stratified;
  cfg.seed = s.seed;
  cfg.threads = s.threads;
  cfg.cache_dir = s.cache.empty() ? default_cache_dir() : fs::path(s.cache);
  cfg.validate();
  return cfg;
}

fs::path feature_path(const fs::path& dir, const std::string& entry_path) {
  return dir / fs::path(entry_path).replace_extension(".lodf");
}

std::string resolve_split(const DatasetManifest& m, const std::string& requested) {
  const auto splits = m.splits();
  if (splits.empty()) throw Error(Errc::ConfigError, "manifest defines no splits");
  if (requested.empty()) return splits.front();
  if (std::find(splits.begin(), splits.end(), requested) == splits.end()) {
    throw Error(Errc::ConfigError, "unknown split '" + requested + "'");
  }
  return requested;
}

Eigen::VectorXd read_vector(const fs::path& path) {
  const DescriptorSet s = read_descriptor_file(path);
  if (s.count() != 1) throw Error(Errc::MalformedFile, path.string() + ": expected exactly one vector");
  Eigen::VectorXd v(s.dimension);
  for (std::uint32_t i = 0; i < s.dimension; ++i) v(i) = s.values[i];
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string format_confusion(const std::vector<std::string>& classes,
                             const std::vector<std::vector<std::size_t>>& confusion) {
  EvalReport r;
  r.classes = classes;
  r.confusion = confusion;
  const std::string text = report_text(r);
  return text.substr(text.find("confusion"));
}

// ---- subcommands ----------------------------------------------------------

struct ExtractArgs {
  std::string manifest;
  std::vector<std::string> images;
  std::string out;
};

int cmd_extract(const ExtractArgs& a, const ExperimentConfig& cfg) {
  std::vector<std::pair<fs::path, fs::path>> jobs;
  if (!a.manifest.empty()) {
    const DatasetManifest m = load_manifest(a.manifest);
    for (const auto& e : m.entries) jobs.emplace_back(m.resolve(e), feature_path(a.out, e.path));
  }
  for (const auto& img : a.images) jobs.emplace_back(img, feature_path(a.out, fs::path(img).filename().string()));
  if (jobs.empty()) throw Error(Errc::ConfigError, "nothing to extract: give --manifest or --image");

  std::vector<std::string> failures(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const DescriptorSet set = describe_image(load_image(jobs[i].first), cfg);
      write_descriptor_file(jobs[i].second, set);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      spdlog::info("extract [{}/{}] {}: {} x {} in {:.1f} ms", i + 1, jobs.size(), jobs[i].first.string(),
                   set.count(), set.dimension, ms);
    } catch (const Error& e) {
      failures[i] = e.what();
      spdlog::error("extract {}: {}", jobs[i].first.string(), e.what());
    }
  });
  const auto failed = std::count_if(failures.begin(), failures.end(), [](const auto& f) { return !f.empty(); });
  if (failed > 0) {
    spdlog::error("extract: {} of {} images failed", failed, jobs.size());
    return kExitStage;
  }
  return 0;
}

struct FitArgs {
  std::string manifest;
  std::string split;
  std::string features;
  std::string out;
};

int cmd_fit(const FitArgs& a, const ExperimentConfig& cfg) {
  if (cfg.descriptor != DescriptorKind::Load) throw Error(Errc::ConfigError, "fit applies to LOAD descriptors only");
  const DatasetManifest m = load_manifest(a.manifest);
  const std::string split = resolve_split(m, a.split);
  std::vector<DescriptorSet> sets;
  std::vector<int> labels;
  for (std::size_t i : m.entries_for(split, SplitRole::Train)) {
    sets.push_back(read_descriptor_file(feature_path(a.features, m.entries[i].path)));
    if (sets.back().dimension != cfg.load.dimension()) {
      throw Error(Errc::DimensionMismatch, m.entries[i].path + ": descriptor dimension " +
                                               std::to_string(sets.back().dimension) + ", configuration expects " +
                                               std::to_string(cfg.load.dimension()));
    }
    labels.push_back(m.class_index(m.entries[i].label));
  }
  const Vocabulary v = fit_vocabulary(sets, labels, cfg);
  save_pca(v.pca, a.out + ".lpca");
  save_gmm(v.gmm, a.out + ".lgmm");
  spdlog::info("fit [{}]: final EM log-likelihood {:.6f} ({} evaluations)", split, v.log_likelihood.back(),
               v.log_likelihood.size());
  return 0;
}

struct EncodeArgs {
  std::string manifest;
  std::string features;
  std::string model;
  std::string out;
};

int cmd_encode(const EncodeArgs& a, const ExperimentConfig& cfg) {
  Vocabulary v;
  v.pca = load_pca(a.model + ".lpca");
  v.gmm = load_gmm(a.model + ".lgmm");
  std::vector<std::pair<fs::path, fs::path>> jobs;
  if (!a.manifest.empty()) {
    const DatasetManifest m = load_manifest(a.manifest);
    for (const auto& e : m.entries) jobs.emplace_back(feature_path(a.features, e.path), feature_path(a.out, e.path));
  } else {
    for (const auto& f : fs::recursive_directory_iterator(a.features)) {
      if (f.is_regular_file() && f.path().extension() == ".lodf") {
        jobs.emplace_back(f.path(), fs::path(a.out) / fs::relative(f.path(), a.features));
      }
    }
    std::sort(jobs.begin(), jobs.end());
  }
  if (jobs.empty()) throw Error(Errc::EmptyInput, "no descriptor files to encode");
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    try {
      const Eigen::VectorXd fv = encode_image(v, read_descriptor_file(jobs[i].first));
      DescriptorSet s(static_cast<std::uint32_t>(fv.size()));
      for (Eigen::Index k = 0; k < fv.size(); ++k) s.values.push_back(static_cast<float>(fv(k)));
      write_descriptor_file(jobs[i].second, s);
    } catch (const Error& e) {
      throw Error(e.code(), "encode [" + jobs[i].first.string() + "]: " + e.what());
    }
  });
  spdlog::info("encode: {} Fisher vectors of length {}", jobs.size(), 2 * v.gmm.means.size());
  return 0;
}

struct TrainArgs {
  std::string manifest;
  std::string split;
  std::string fv;
  std::string out;
};

int cmd_train(const TrainArgs& a, const ExperimentConfig& cfg) {
  const DatasetManifest m = load_manifest(a.manifest);
  const std::string split = resolve_split(m, a.split);
  const auto ids = m.entries_for(split, SplitRole::Train);
  std::vector<Eigen::VectorXd> rows;
  std::vector<int> labels;
  for (std::size_t i : ids) {
    rows.push_back(read_vector(feature_path(a.fv, m.entries[i].path)));
    labels.push_back(m.class_index(m.entries[i].label));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != x.cols()) throw Error(Errc::DimensionMismatch, "feature lengths differ across images");
    x.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  SvmOptions opts;
  opts.c_param = cfg.c_param;
  opts.threads = cfg.threads;
  const SvmFit fit = train(x, labels, m.classes, cfg.seed, opts);
  save_linear_model(fit.model, a.out);
  for (std::size_t c = 0; c < fit.traces.size(); ++c) {
    spdlog::info("train [{}] {}: {} epochs, primal {:.6g}, dual {:.6g}", split, m.classes[c],
                 fit.traces[c].epochs, fit.traces[c].primal, fit.traces[c].dual);
  }
  return 0;
}

struct EvalArgs {
  std::string manifest;
  std::string split;
  std::string fv;
  std::string model;
  std::string report;
  std::string timing;
};

int cmd_eval(const EvalArgs& a, const ExperimentConfig& cfg) {
  if (a.model.empty()) {
    const EvalReport r = run_experiment(load_manifest(a.manifest), cfg);
    std::cout << report_text(r);
    if (!a.report.empty()) write_text(a.report, report_csv(r));
    if (!a.timing.empty()) write_text(a.timing, timing_csv(r.timing));
    std::fprintf(stderr, "timing: extraction %.2fs, encoding %.2fs, training %.2fs\n", r.timing.extraction,
                 r.timing.encoding, r.timing.training);
    return 0;
  }
  if (a.fv.empty()) throw Error(Errc::ConfigError, "--model needs --fv with the encoded test images");
  const LinearModel model = load_linear_model(a.model);
  const DatasetManifest m = load_manifest(a.manifest);
  const std::string split = resolve_split(m, a.split);
  std::vector<std::vector<std::size_t>> confusion(m.classes.size(), std::vector<std::size_t>(m.classes.size(), 0));
  std::size_t correct = 0;
  const auto ids = m.entries_for(split, SplitRole::Test);
  for (std::size_t i : ids) {
    const int truth = m.class_index(m.entries[i].label);
    const int guess = predict(model, read_vector(feature_path(a.fv, m.entries[i].path))).label;
    const auto pred_name = model.classes[static_cast<std::size_t>(guess)];
    const int pred = m.class_index(pred_name);
    if (pred < 0) throw Error(Errc::DegenerateLabels, "model class '" + pred_name + "' is not in the manifest");
    ++confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
    if (truth == pred) ++correct;
  }
  std::printf("split %s: %.1f%% (%zu / %zu)\n", split.c_str(),
              100.0 * static_cast<double>(correct) / static_cast<double>(ids.size()), correct, ids.size());
  std::cout << format_confusion(m.classes, confusion);
  return 0;
}

struct BenchArgs {
  std::string mode = "all";
  std::vector<std::string> images;
  int synthetic = 10;
  int size = 64;
  int throughput_size = 300;
  int repeats = 3;
  double min_rate = 0.0;
  std::string out;
};

int cmd_bench(const BenchArgs& a, const ExperimentConfig& cfg) {
  if (a.mode == "invariance" || a.mode == "all") {
    std::vector<GrayImage> images;
    for (const auto& p : a.images) images.push_back(load_image(p));
    if (images.empty()) {
      std::mt19937_64 rng(cfg.seed);
      for (int i = 0; i < a.synthetic; ++i) images.push_back(noise_image(a.size, a.size, rng));
    }
    InvarianceOptions opts;
    opts.step = cfg.step;
    const std::string csv = invariance_csv(invariance_bench(images, cfg.load, opts));
    if (a.out.empty()) std::cout << csv;
    else write_text(a.out, csv);
  }
  if (a.mode == "throughput" || a.mode == "all") {
    const ThroughputResult t = throughput_bench(cfg.load, a.throughput_size, a.repeats, cfg.step, cfg.seed);
    std::printf("throughput,%zu descriptors,%.3f s,%.0f descriptors/s\n", t.descriptors, t.seconds, t.per_second);
    if (t.per_second < a.min_rate) {
      spdlog::error("bench: {:.0f} descriptors/s is below the required {:.0f}", t.per_second, a.min_rate);
      return kExitStage;
    }
  }
  return 0;
}

int cmd_synth(const SynthOptions& opts, const std::string& out) {
  const DatasetManifest m = synth_textures(opts, out);
  spdlog::info("synth: {} entries, {} classes, manifest {}", m.entries.size(), m.classes.size(),
               (fs::path(out) / "manifest.txt").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("loadtex"));
  spdlog::set_pattern("%^%l%$: %v");

  CLI::App app{"Rotation- and illumination-robust texture descriptors and classification"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Shared shared;
  std::map<CLI::App*, SharedOptions> shared_options;
  auto add_command = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    shared_options[sub] = add_shared(*sub, shared);
    return sub;
  };

  ExtractArgs extract_args;
  CLI::App* extract = add_command("extract", "Write one LODF descriptor file per image");
  extract->add_option("--manifest", extract_args.manifest, "Data set manifest")->check(CLI::ExistingFile);
  extract->add_option("--image", extract_args.images, "Individual image files");
  extract->add_option("--out", extract_args.out, "Output directory")->required();

  FitArgs fit_args;
  CLI::App* fit = add_command("fit", "Fit PCA and GMM on the training descriptors of one split");
  fit->add_option("--manifest", fit_args.manifest, "Data set manifest")->required()->check(CLI::ExistingFile);
  fit->add_option("--split", fit_args.split, "Split name (default: first split)");
  fit->add_option("--features", fit_args.features, "Directory written by extract")->required();
  fit->add_option("--out", fit_args.out, "Output prefix (.lpca and .lgmm are appended)")->required();

  EncodeArgs encode_args;
  CLI::App* encode = add_command("encode", "Encode descriptor files as Fisher vectors");
  encode->add_option("--manifest", encode_args.manifest, "Encode only the entries of this manifest");
  encode->add_option("--features", encode_args.features, "Directory written by extract")->required();
  encode->add_option("--model", encode_args.model, "Prefix written by fit")->required();
  encode->add_option("--out", encode_args.out, "Output directory")->required();

  TrainArgs train_args;
  CLI::App* train_cmd = add_command("train", "Train the one-vs-all linear SVM on one split");
  train_cmd->add_option("--manifest", train_args.manifest, "Data set manifest")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--split", train_args.split, "Split name (default: first split)");
  train_cmd->add_option("--fv", train_args.fv, "Directory of image feature files (encode output, or extract output for --descriptor lbp)")->required();
  train_cmd->add_option("--out", train_args.out, "Model file (LSVM)")->required();

  EvalArgs eval_args;
  CLI::App* eval = add_command("eval", "Run the full protocol over every split, or score one trained model");
  eval->add_option("--manifest", eval_args.manifest, "Data set manifest")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_args.split, "Split scored with --model (default: first split)");
  eval->add_option("--fv", eval_args.fv, "Feature directory for --model");
  eval->add_option("--model", eval_args.model, "Score this LSVM model instead of running the full protocol");
  eval->add_option("--report", eval_args.report, "Also write the report as CSV");
  eval->add_option("--timing", eval_args.timing, "Also write stage timings as CSV");

  BenchArgs bench_args;
  CLI::App* bench = add_command("bench", "Invariance and throughput benchmarks");
  bench->add_option("--mode", bench_args.mode, "What to run")->check(CLI::IsMember({"invariance", "throughput", "all"}));
  bench->add_option("--image", bench_args.images, "Images for the invariance rows (default: noise images)")->check(CLI::ExistingFile);
  bench->add_option("--synthetic", bench_args.synthetic, "Number of noise images when no --image is given");
  bench->add_option("--size", bench_args.size, "Side of the noise images");
  bench->add_option("--throughput-size", bench_args.throughput_size, "Side of the throughput images");
  bench->add_option("--repeats", bench_args.repeats, "Throughput images");
  bench->add_option("--min-rate", bench_args.min_rate, "Fail when descriptors/s falls below this");
  bench->add_option("--out", bench_args.out, "Invariance CSV path (default: stdout)");

  SynthOptions synth_opts;
  std::string synth_out;
  CLI::App* synth = add_command("synth", "Generate a synthetic texture data set with manifest");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--classes", synth_opts.classes, "Number of classes (2..10)");
  synth->add_option("--per-class", synth_opts.per_class, "Images per class");
  synth->add_option("--size", synth_opts.size, "Image side in pixels");
  synth->add_option("--train-per-class", synth_opts.train_per_class, "Training images per class and split");
  synth->add_option("--splits", synth_opts.splits, "Number of train/test configurations");
  synth->add_option("--image-seed", synth_opts.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  ExperimentConfig cfg;
  try {
    if (!shared.config_file.empty()) apply_config_file(*sub, shared.config_file);
    spdlog::set_level(shared.verbose ? spdlog::level::debug
                                     : shared.quiet ? spdlog::level::warn : spdlog::level::info);
    cfg = build_config(shared, shared_options.at(sub));
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  }

  const std::string name = sub->get_name();
  try {
    if (sub == extract) return cmd_extract(extract_args, cfg);
    if (sub == fit) return cmd_fit(fit_args, cfg);
    if (sub == encode) return cmd_encode(encode_args, cfg);
    if (sub == train_cmd) return cmd_train(train_args, cfg);
    if (sub == eval) return cmd_eval(eval_args, cfg);
    if (sub == bench) return cmd_bench(bench_args, cfg);
    return cmd_synth(synth_opts, synth_out);
  } catch (const Error& e) {
    spdlog::error("{}: {}", name, e.what());
    return e.code() == Errc::ConfigError ? kExitUsage : kExitStage;
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", name, e.what());
    return kExitStage;
  }
}
