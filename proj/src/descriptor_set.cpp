#include "loadtex/descriptor_set.hpp"

#include <string>

#include "loadtex/binary_io.hpp"
#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"

namespace loadtex {

namespace {
constexpr std::uint32_t kDescriptorFileVersion = 1;
}

void DescriptorSet::append(std::span<const float> descriptor) {
  if (descriptor.size() != dimension) {
    throw Error(Errc::DimensionMismatch, "descriptor of length " + std::to_string(descriptor.size()) +
                                             " appended to set of dimension " +
                                             std::to_string(dimension));
  }
  values.insert(values.end(), descriptor.begin(), descriptor.end());
}

void DescriptorSet::append(const DescriptorSet& other) {
  if (empty() && dimension == 0) dimension = other.dimension;
  if (other.dimension != dimension) {
    throw Error(Errc::DimensionMismatch, "cannot merge descriptor sets of different dimension");
  }
  values.insert(values.end(), other.values.begin(), other.values.end());
}

std::vector<std::uint8_t> encode_descriptor_file(const DescriptorSet& set) {
  ByteWriter w;
  w.magic("LODF");
  w.put<std::uint32_t>(kDescriptorFileVersion);
  w.put<std::uint64_t>(set.count());
  w.put<std::uint32_t>(set.dimension);
  w.put_all<float>(set.values);
  return std::move(w.bytes());
}

DescriptorSet decode_descriptor_file(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "descriptor file");
  r.expect_magic("LODF");
  const auto version = r.get<std::uint32_t>();
  if (version != kDescriptorFileVersion) {
    throw Error(Errc::UnsupportedFormat, "descriptor file version " + std::to_string(version));
  }
  const auto count = r.get<std::uint64_t>();
  DescriptorSet set(r.get<std::uint32_t>());
  if (set.dimension == 0 && count != 0) {
    throw Error(Errc::MalformedFile, "descriptor file: zero dimension");
  }
  if (set.dimension != 0 && count > r.remaining() / (sizeof(float) * set.dimension)) {
    throw Error(Errc::MalformedFile, "descriptor file: truncated body");
  }
  set.values.resize(static_cast<std::size_t>(count) * set.dimension);
  r.get_all<float>(set.values);
  r.expect_end();
  return set;
}

void write_descriptor_file(const std::filesystem::path& path, const DescriptorSet& set) {
  write_file_atomic(path, encode_descriptor_file(set));
}

DescriptorSet read_descriptor_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_descriptor_file(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace loadtex
