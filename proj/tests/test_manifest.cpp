#include <doctest.h>

#include <fstream>

#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"
#include "loadtex/manifest.hpp"
#include "support.hpp"

using namespace loadtex;

namespace {

void touch_image(const std::filesystem::path& p) { save_pgm(GrayImage(4, 4, 1.0f), p); }

void write(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::IoError;
}

DatasetManifest forty_per_class() {
  DatasetManifest m;
  m.name = "m";
  m.classes = {"x", "y"};
  for (const std::string c : {"x", "y"}) {
    for (int i = 0; i < 40; ++i) m.entries.push_back({c + std::to_string(i) + ".pgm", c, {}});
  }
  return m;
}

}  // namespace

TEST_SUITE("manifest") {

TEST_CASE("minimal manifest") {
  testing::TempDir dir("manifest");
  for (const char* f : {"a.pgm", "b.pgm", "c.pgm", "d.pgm"}) touch_image(dir.path() / f);
  write(dir.path() / "m.txt",
        "# name: tiny\n"
        "a.pgm\tcat\ts0:train\n"
        "b.pgm\tcat\ts0:test\n"
        "\n"
        "c.pgm\tdog\ts0:train\n"
        "d.pgm\tdog\ts0:test\n");
  const DatasetManifest m = load_manifest(dir.path() / "m.txt");
  CHECK(m.name == "tiny");
  CHECK(m.classes == std::vector<std::string>{"cat", "dog"});
  CHECK(m.entries.size() == 4);
  CHECK(m.splits() == std::vector<std::string>{"s0"});
  CHECK(m.entries_for("s0", SplitRole::Test) == std::vector<std::size_t>{1, 3});
  CHECK(m.resolve(m.entries[0]) == dir.path() / "a.pgm");
  CHECK(parse_manifest(format_manifest(m), m.root).entries == m.entries);
}

TEST_CASE("missing files are all named") {
  testing::TempDir dir("manifest_missing");
  touch_image(dir.path() / "a.pgm");
  write(dir.path() / "m.txt", "a.pgm\tx\nghost.pgm\tx\nother.pgm\ty\n");
  try {
    load_manifest(dir.path() / "m.txt");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingFile);
    CHECK(std::string(e.what()).find("ghost.pgm") != std::string::npos);
    CHECK(std::string(e.what()).find("other.pgm") != std::string::npos);
  }
}

TEST_CASE("parse errors") {
  CHECK(error_of([] { parse_manifest("a.pgm\tx\na.pgm\ty\n", "."); }) == Errc::ParseError);
  try {
    parse_manifest("a.pgm\tx\na.pgm\ty\n", ".");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ambiguous") != std::string::npos);
  }
  CHECK(error_of([] { parse_manifest("a.pgm\tx\ta:validate\n", "."); }) == Errc::ParseError);
  CHECK(error_of([] { parse_manifest("a.pgm\tx\ts:train,s:test\n", "."); }) == Errc::ParseError);
  CHECK(error_of([] { parse_manifest("just-a-path\n", "."); }) == Errc::ParseError);
  CHECK(error_of([] { parse_manifest("# only a comment\n", "."); }) == Errc::ParseError);
}

TEST_CASE("every class needs train and test entries") {
  const DatasetManifest m = parse_manifest("a\tx\ts:train\nb\tx\ts:test\nc\ty\ts:train\n", ".");
  CHECK(error_of([&] { validate_manifest(m, false); }) == Errc::EmptyClass);
}

TEST_CASE("seeded splits") {
  const DatasetManifest base = forty_per_class();
  const DatasetManifest s = make_splits(base, 20, 5, 3);
  CHECK(s.splits() == std::vector<std::string>{"split0", "split1", "split2", "split3", "split4"});
  for (const auto& name : s.splits()) {
    for (const auto role : {SplitRole::Train, SplitRole::Test}) {
      int per_class[2] = {0, 0};
      for (std::size_t i : s.entries_for(name, role)) ++per_class[s.class_index(s.entries[i].label)];
      CHECK(per_class[0] == 20);
      CHECK(per_class[1] == 20);
    }
  }
  CHECK(make_splits(base, 20, 5, 3).entries == s.entries);
  CHECK(make_splits(base, 20, 5, 4).entries != s.entries);
  CHECK(s.entries_for("split0", SplitRole::Train) != s.entries_for("split1", SplitRole::Train));
  CHECK_NOTHROW(validate_manifest(s, false));
  CHECK(error_of([&] { make_splits(base, 40, 1, 0); }) == Errc::InsufficientImages);
}

TEST_CASE("Outex layout") {
  testing::TempDir dir("outex");
  const auto root = dir.path() / "suite";
  write(root / "classes.txt", "2\ncanvas 0\ntile 1\n");
  write(root / "000" / "train.txt", "2\n000000.ras 0\n000002.ras 1\n");
  write(root / "000" / "test.txt", "2\n000001.ras 0\n000003.ras 1\n");
  write(root / "001" / "train.txt", "2\n000001.ras 0\n000003.ras 1\n");
  write(root / "001" / "test.txt", "2\n000000.ras 0\n000002.ras 1\n");
  for (int i = 0; i < 4; ++i) touch_image(root / "images" / ("00000" + std::to_string(i) + ".pgm"));
  const DatasetManifest m = load_outex_layout(root, ".pgm");
  CHECK(m.classes == std::vector<std::string>{"canvas", "tile"});
  CHECK(m.entries.size() == 4);
  CHECK(m.splits() == std::vector<std::string>{"000", "001"});
  CHECK(m.entries_for("001", SplitRole::Train).size() == 2);
  write(root / "001" / "test.txt", "3\n000000.ras 0\n000002.ras 1\n");
  CHECK(error_of([&] { load_outex_layout(root, ".pgm"); }) == Errc::ParseError);
}

}  // TEST_SUITE
