#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "loadtex/image.hpp"

namespace loadtex {

enum class ImageFormat { Pgm, Png };

/// Decodes an 8-bit raster. PGM accepts binary P5 (and P6, converted by luma);
/// PNG accepts gray, gray+alpha, RGB and RGBA. Colour is reduced with
/// 0.299 R + 0.587 G + 0.114 B.
GrayImage decode_image(std::span<const std::uint8_t> bytes, ImageFormat format);

/// Format sniffed from the leading bytes; UnsupportedFormat otherwise.
ImageFormat detect_format(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
GrayImage load_image(const std::filesystem::path& path);

/// 8-bit P5 encoding; values are rounded and clamped to [0, 255].
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Atomic write: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);

}  // namespace loadtex
