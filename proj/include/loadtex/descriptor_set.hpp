#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace loadtex {

/// Row-major block of equal-length float descriptors.
struct DescriptorSet {
  std::uint32_t dimension = 0;
  std::vector<float> values;

  DescriptorSet() = default;
  explicit DescriptorSet(std::uint32_t dim) : dimension(dim) {}

  std::size_t count() const noexcept {
    return dimension == 0 ? 0 : values.size() / dimension;
  }
  bool empty() const noexcept { return values.empty(); }

  std::span<const float> row(std::size_t i) const noexcept {
    return {values.data() + i * dimension, dimension};
  }
  std::span<float> row(std::size_t i) noexcept {
    return {values.data() + i * dimension, dimension};
  }

  /// DimensionMismatch if `descriptor` has the wrong length.
  void append(std::span<const float> descriptor);
  void append(const DescriptorSet& other);

  friend bool operator==(const DescriptorSet&, const DescriptorSet&) = default;
};

// "LODF" container: magic, u32 version (1), u64 count, u32 dimension, then
// count*dimension little-endian IEEE-754 floats.
std::vector<std::uint8_t> encode_descriptor_file(const DescriptorSet& set);
DescriptorSet decode_descriptor_file(std::span<const std::uint8_t> bytes);

void write_descriptor_file(const std::filesystem::path& path, const DescriptorSet& set);
DescriptorSet read_descriptor_file(const std::filesystem::path& path);

}  // namespace loadtex
