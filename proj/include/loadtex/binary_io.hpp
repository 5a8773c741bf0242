#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "loadtex/error.hpp"

namespace loadtex {

// Little-endian serialisation shared by the descriptor and model files.
class ByteWriter {
 public:
  void magic(std::string_view tag) { bytes_.insert(bytes_.end(), tag.begin(), tag.end()); }

  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(std::begin(raw), std::end(raw));
    }
    bytes_.insert(bytes_.end(), std::begin(raw), std::end(raw));
  }

  template <typename T>
  void put_all(std::span<const T> values) {
    for (T v : values) put(v);
  }

  std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  void expect_magic(std::string_view tag) {
    need(tag.size());
    if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
      throw Error(Errc::MalformedFile, what_ + ": bad magic, expected " + std::string(tag));
    }
    pos_ += tag.size();
  }

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(std::begin(raw), std::end(raw));
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  template <typename T>
  void get_all(std::span<T> out) {
    need(out.size() * sizeof(T));
    for (T& v : out) v = get<T>();
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void expect_end() const {
    if (remaining() != 0) {
      throw Error(Errc::MalformedFile, what_ + ": trailing bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(Errc::MalformedFile, what_ + ": truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace loadtex
