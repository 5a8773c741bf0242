#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "loadtex/image.hpp"
#include "loadtex/manifest.hpp"

namespace loadtex {

/// Generator parameters of one synthetic texture class: an oriented sinusoid
/// over Gaussian-filtered noise.
struct TextureClass {
  double frequency = 0.1;     // cycles per pixel
  double orientation = 0.0;   // radians, wave-vector direction
  double blur = 1.0;          // Gaussian sigma of the noise filter, pixels
  double wave_amplitude = 40.0;
  double noise_amplitude = 20.0;
};

/// Parameters of class `index` in [0, 10).
TextureClass texture_class(int index);

/// One texture sample with random phase and slight orientation jitter.
/// Intensities lie in [64, 192].
GrayImage render_texture(const TextureClass& cls, int size, std::mt19937_64& rng);

/// Uniform noise with integer intensities in [0, 255].
GrayImage noise_image(int width, int height, std::mt19937_64& rng);

struct SynthOptions {
  int classes = 5;
  int per_class = 40;
  int size = 64;
  int train_per_class = 20;
  int splits = 5;
  std::uint64_t seed = 1;
};

/// Writes a PGM texture data set under `out_dir` together with
/// `out_dir/manifest.txt` and returns the manifest. Splits are drawn with
/// make_splits; whenever a sample is in a test role it is served as a
/// separate file that is rotated by a random multiple of 90 degrees and
/// given a random positive affine intensity map.
DatasetManifest synth_textures(const SynthOptions& options, const std::filesystem::path& out_dir);

}  // namespace loadtex
