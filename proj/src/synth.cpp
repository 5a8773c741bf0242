#include "loadtex/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"

namespace loadtex {

namespace {

constexpr double kPi = std::numbers::pi;

// Distinct frequency / bandwidth per class; orientations differ as well so that
// an orientation-sensitive descriptor is confused by rotated test samples.
constexpr std::array<TextureClass, 10> kClasses{{
    {0.030, 0.0, 2.0, 45.0, 15.0},
    {0.060, kPi / 2, 1.0, 40.0, 20.0},
    {0.100, kPi / 4, 1.5, 35.0, 20.0},
    {0.150, 0.0, 0.7, 30.0, 25.0},
    {0.220, 3 * kPi / 4, 1.2, 35.0, 15.0},
    {0.045, kPi / 3, 0.6, 25.0, 30.0},
    {0.080, 2 * kPi / 3, 2.5, 45.0, 10.0},
    {0.120, kPi / 6, 1.0, 20.0, 35.0},
    {0.180, 5 * kPi / 6, 2.0, 40.0, 15.0},
    {0.260, kPi / 2, 0.8, 30.0, 20.0},
}};

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Filtered unit-variance noise of size x size.
std::vector<double> filtered_noise(int size, double sigma, std::mt19937_64& rng) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int padded = size + 2 * radius;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> raw(static_cast<std::size_t>(padded) * padded);
  for (double& v : raw) v = normal(rng);

  std::vector<double> rows(static_cast<std::size_t>(padded) * size, 0.0);  // padded rows x size cols
  for (int y = 0; y < padded; ++y) {
    for (int x = 0; x < size; ++x) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(kernel.size()); ++t) acc += kernel[t] * raw[y * padded + x + t];
      rows[static_cast<std::size_t>(y) * size + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(size) * size, 0.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(kernel.size()); ++t) acc += kernel[t] * rows[(y + t) * size + x];
      out[static_cast<std::size_t>(y) * size + x] = acc;
    }
  }
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  for (double& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TextureClass texture_class(int index) {
  if (index < 0 || index >= static_cast<int>(kClasses.size())) {
    throw Error(Errc::ConfigError, "synthetic texture class index must lie in [0, 10)");
  }
  return kClasses[static_cast<std::size_t>(index)];
}

GrayImage render_texture(const TextureClass& cls, int size, std::mt19937_64& rng) {
  if (size < 1) throw Error(Errc::ConfigError, "texture size must be positive");
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> jitter_dist(-0.1, 0.1);
  const double phase = phase_dist(rng);
  const double theta = cls.orientation + jitter_dist(rng);
  const double kx = 2.0 * kPi * cls.frequency * std::cos(theta);
  const double ky = 2.0 * kPi * cls.frequency * std::sin(theta);
  const auto noise = filtered_noise(size, cls.blur, rng);
  std::vector<float> pixels(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * size + x;
      const double v = 128.0 + cls.wave_amplitude * std::sin(kx * x + ky * y + phase) +
                       cls.noise_amplitude * noise[i];
      pixels[i] = static_cast<float>(std::clamp(v, 64.0, 192.0));
    }
  }
  return GrayImage(size, size, std::move(pixels));
}

GrayImage noise_image(int width, int height, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(0, 255);
  std::vector<float> pixels(static_cast<std::size_t>(width) * height);
  for (float& v : pixels) v = static_cast<float>(level(rng));
  return GrayImage(width, height, std::move(pixels));
}

DatasetManifest synth_textures(const SynthOptions& options, const std::filesystem::path& out_dir) {
  if (options.classes < 2 || options.classes > 10) {
    throw Error(Errc::ConfigError, "synthetic data sets have 2 to 10 classes");
  }
  if (options.per_class < 2 || options.size < 8) {
    throw Error(Errc::ConfigError, "need at least 2 images per class of at least 8 px");
  }

  DatasetManifest base;
  base.name = "synth";
  base.root = out_dir;
  for (int c = 0; c < options.classes; ++c) {
    base.classes.push_back("class" + std::to_string(c));
    for (int i = 0; i < options.per_class; ++i) {
      base.entries.push_back(ManifestEntry{
          "c" + std::to_string(c) + "/s" + std::to_string(i) + ".pgm", base.classes.back(), {}});
    }
  }
  const DatasetManifest split =
      make_splits(base, options.train_per_class, options.splits, options.seed);

  DatasetManifest out;
  out.name = base.name;
  out.root = out_dir;
  out.classes = base.classes;
  std::vector<ManifestEntry> variants;
  for (std::size_t e = 0; e < split.entries.size(); ++e) {
    const auto c = static_cast<std::uint64_t>(e / static_cast<std::size_t>(options.per_class));
    const auto i = static_cast<std::uint64_t>(e % static_cast<std::size_t>(options.per_class));
    std::mt19937_64 rng(mix_seed(options.seed, c, i));
    const GrayImage canonical = render_texture(kClasses[c], options.size, rng);

    ManifestEntry train_entry = split.entries[e];
    ManifestEntry test_entry{split.entries[e].path.substr(0, split.entries[e].path.size() - 4) + "_t.pgm",
                             split.entries[e].label,
                             {}};
    std::erase_if(train_entry.tags, [](const SplitTag& t) { return t.role != SplitRole::Train; });
    for (const auto& t : split.entries[e].tags) {
      if (t.role == SplitRole::Test) test_entry.tags.push_back(t);
    }

    if (!train_entry.tags.empty()) {
      save_pgm(canonical, out_dir / train_entry.path);
      out.entries.push_back(std::move(train_entry));
    }
    if (!test_entry.tags.empty()) {
      std::uniform_int_distribution<int> turns(0, 3);
      std::uniform_real_distribution<double> gain(0.75, 1.25);
      const int k = turns(rng);
      const double a = gain(rng);
      const double lo = std::max(-25.0, 5.0 - 64.0 * a);
      const double hi = std::min(25.0, 250.0 - 192.0 * a);
      const double b = std::uniform_real_distribution<double>(lo, hi)(rng);
      save_pgm(affine_intensity(rotate90(canonical, k), a, b), out_dir / test_entry.path);
      variants.push_back(std::move(test_entry));
    }
  }
  for (auto& v : variants) out.entries.push_back(std::move(v));
  save_manifest(out, out_dir / "manifest.txt");
  return out;
}

}  // namespace loadtex
