#include <doctest.h>
#include <png.h>

#include <string>

#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"
#include "support.hpp"

using namespace loadtex;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> raster) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raster.begin(), raster.end());
  return out;
}

std::vector<std::uint8_t> png_bytes(int w, int h, png_uint_32 format, const std::vector<std::uint8_t>& px) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  png_alloc_size_t size = 0;
  REQUIRE(png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr));
  std::vector<std::uint8_t> out(size);
  REQUIRE(png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr));
  out.resize(size);
  return out;
}

Errc code_of(const std::vector<std::uint8_t>& bytes, ImageFormat f) {
  try {
    decode_image(bytes, f);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decode unexpectedly succeeded");
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("image_io") {

TEST_CASE("minimal P5") {
  const auto bytes = bytes_of("P5\n2 2\n255\n", {0, 255, 128, 64});
  CHECK(detect_format(bytes) == ImageFormat::Pgm);
  const GrayImage img = decode_image(bytes, ImageFormat::Pgm);
  CHECK(img == GrayImage(2, 2, std::vector<float>{0, 255, 128, 64}));
}

TEST_CASE("header comments and reduced maxval") {
  const auto bytes = bytes_of("P5 # comment\n2 # w\n1\n15\n", {0, 15});
  const GrayImage img = decode_image(bytes, ImageFormat::Pgm);
  CHECK(img.at(0, 0) == 0.0f);
  CHECK(img.at(1, 0) == doctest::Approx(255.0));
}

TEST_CASE("P6 luma") {
  const auto bytes = bytes_of("P6\n2 1\n255\n", {255, 255, 255, 255, 0, 0});
  const GrayImage img = decode_image(bytes, ImageFormat::Pgm);
  CHECK(img.at(0, 0) == doctest::Approx(255.0));
  CHECK(img.at(1, 0) == doctest::Approx(0.299 * 255.0).epsilon(1e-6));
  CHECK(img.at(1, 0) == doctest::Approx(76.245).epsilon(1e-6));
}

TEST_CASE("malformed and unsupported PNM") {
  CHECK(code_of(bytes_of("P5\n2 2\n65535\n", {0, 0, 0, 0, 0, 0, 0, 0}), ImageFormat::Pgm) ==
        Errc::UnsupportedFormat);
  CHECK(code_of(bytes_of("P5\n2 2\n255\n", {1, 2, 3}), ImageFormat::Pgm) == Errc::MalformedFile);
  CHECK(code_of(bytes_of("P5\n0 2\n255\n", {}), ImageFormat::Pgm) == Errc::MalformedFile);
  CHECK(code_of(bytes_of("P5\nx 2\n255\n", {}), ImageFormat::Pgm) == Errc::MalformedFile);
  const std::vector<std::uint8_t> junk{'G', 'I', 'F', '8'};
  CHECK_THROWS_AS(detect_format(junk), Error);
}

TEST_CASE("PNG gray and colour") {
  const auto gray = png_bytes(3, 1, PNG_FORMAT_GRAY, {0, 17, 255});
  CHECK(detect_format(gray) == ImageFormat::Png);
  CHECK(decode_image(gray, ImageFormat::Png) == GrayImage(3, 1, std::vector<float>{0, 17, 255}));

  const auto rgb = png_bytes(2, 1, PNG_FORMAT_RGB, {255, 255, 255, 255, 0, 0});
  const GrayImage c = decode_image(rgb, ImageFormat::Png);
  CHECK(c.at(0, 0) == doctest::Approx(255.0));
  CHECK(c.at(1, 0) == doctest::Approx(76.245).epsilon(1e-6));

  auto broken = gray;
  broken.resize(broken.size() / 2);
  CHECK(code_of(broken, ImageFormat::Png) == Errc::MalformedFile);
}

TEST_CASE("PGM round trip through files") {
  testing::TempDir dir("io");
  const GrayImage img = testing::noise(13, 9, 7);
  save_pgm(img, dir.path() / "sub" / "a.pgm");
  CHECK(load_image(dir.path() / "sub" / "a.pgm") == img);

  const GrayImage odd(3, 1, std::vector<float>{-5.0f, 12.5f, 300.0f});
  const auto encoded = encode_pgm(odd);
  const GrayImage back = decode_image(encoded, ImageFormat::Pgm);
  CHECK(back.at(0, 0) == 0.0f);
  CHECK(back.at(1, 0) == 13.0f);
  CHECK(back.at(2, 0) == 255.0f);

  try {
    load_image(dir.path() / "missing.pgm");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingFile);
    CHECK(std::string(e.what()).find("missing.pgm") != std::string::npos);
  }
}

TEST_CASE("atomic write leaves no temporary files") {
  testing::TempDir dir("atomic");
  const std::vector<std::uint8_t> data{1, 2, 3};
  write_file_atomic(dir.path() / "x.bin", data);
  write_file_atomic(dir.path() / "x.bin", data);
  CHECK(read_file_bytes(dir.path() / "x.bin") == data);
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  CHECK(files == 1);
}

}  // TEST_SUITE
