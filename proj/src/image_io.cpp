#include "loadtex/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <thread>

#include "loadtex/error.hpp"

namespace loadtex {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

float luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<float>(kLumaR * r + kLumaG * g + kLumaB * b);
}

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Header integers are separated by whitespace; '#' starts a comment.
  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(Errc::MalformedFile, "PNM header: expected integer");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw Error(Errc::MalformedFile, "PNM header: value overflow");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(Errc::MalformedFile, "PNM header: missing separator before raster");
    }
    ++pos_;
  }

  std::size_t pos() const noexcept { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(Errc::MalformedFile, "not a PNM file");
  }
  const bool color = bytes[1] == '6';
  if (bytes[1] != '5' && !color) {
    throw Error(Errc::UnsupportedFormat,
                std::string("PNM variant P") + static_cast<char>(bytes[1]) +
                    " (only binary P5/P6 supported)");
  }
  PnmReader reader(bytes);
  const long width = reader.next_int();
  const long height = reader.next_int();
  const long maxval = reader.next_int();
  reader.single_space();
  if (width < 1 || height < 1) throw Error(Errc::MalformedFile, "PNM: zero dimension");
  if (maxval < 1) throw Error(Errc::MalformedFile, "PNM: maxval must be >= 1");
  if (maxval > 255) throw Error(Errc::UnsupportedFormat, "PNM: 16-bit samples");
  const std::size_t channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - reader.pos() < count * channels) {
    throw Error(Errc::MalformedFile, "PNM: truncated raster");
  }
  const std::uint8_t* raster = bytes.data() + reader.pos();
  const double scale = 255.0 / static_cast<double>(maxval);
  std::vector<float> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    float v = color ? luma(raster[3 * i], raster[3 * i + 1], raster[3 * i + 2])
                    : static_cast<float>(raster[i]);
    if (maxval != 255) v = static_cast<float>(v * scale);
    pixels[i] = v;
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(Errc::MalformedFile, std::string("PNG: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw Error(Errc::MalformedFile, "PNG: " + message);
  }
  const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
  std::vector<float> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    pixels[i] = color ? luma(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2])
                      : static_cast<float>(buffer[i]);
  }
  return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height),
                   std::move(pixels));
}

}  // namespace

ImageFormat detect_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin())) {
    return ImageFormat::Png;
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
    return ImageFormat::Pgm;
  }
  throw Error(Errc::UnsupportedFormat, "unrecognised image signature");
}

GrayImage decode_image(std::span<const std::uint8_t> bytes, ImageFormat format) {
  switch (format) {
    case ImageFormat::Pgm: return decode_pnm(bytes);
    case ImageFormat::Png: return decode_png(bytes);
  }
  throw Error(Errc::UnsupportedFormat, "unknown format");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::MissingFile, path.string());
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes, detect_format(bytes));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (float v : img.pixels()) {
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)));
  }
  return out;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pgm(img));
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) +
         "_" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace loadtex
