#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loadtex/image.hpp"
#include "loadtex/load_descriptor.hpp"

namespace loadtex {

struct InvarianceOptions {
  int step = 4;
  std::vector<double> pyramid{1.0};
  /// Intensity map used by the "affine" row.
  double gain = 1.5;
  double offset = -20.0;
};

struct InvarianceRow {
  std::string transform;  // identity, affine, rot90, rot180, rot270
  std::size_t images = 0;
  std::size_t descriptors = 0;
  double mean_l1 = 0.0;
  double max_l1 = 0.0;
};

/// For every image and pyramid level, compares the descriptors at each
/// dense-grid point with those of the transformed level at the
/// corresponding point. Rotations act on the rescaled level so both sides
/// share the same lattice.
std::vector<InvarianceRow> invariance_bench(const std::vector<GrayImage>& images,
                                            const LoadConfig& cfg,
                                            const InvarianceOptions& options = {});

std::string invariance_csv(const std::vector<InvarianceRow>& rows);

struct ThroughputResult {
  std::size_t descriptors = 0;
  double seconds = 0.0;
  double per_second = 0.0;
};

/// Single-threaded dense extraction over the full pyramid on `repeats`
/// uniform-noise images of size x size.
ThroughputResult throughput_bench(const LoadConfig& cfg, int size = 300, int repeats = 3,
                                  int step = 4, std::uint64_t seed = 1);

}  // namespace loadtex
