#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace loadtex {

enum class SplitRole { Train, Test };

struct SplitTag {
  std::string split;
  SplitRole role = SplitRole::Train;

  friend bool operator==(const SplitTag&, const SplitTag&) = default;
};

struct ManifestEntry {
  std::string path;  // relative to DatasetManifest::root unless absolute
  std::string label;
  std::vector<SplitTag> tags;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Labelled image list with any number of named train/test partitions.
///
/// On disk: one entry per line, `<path>\t<label>\t<tags>`, where tags is a
/// comma-separated list of `<split>:train` / `<split>:test` (possibly empty).
/// Lines starting with '#' are comments; `# name: <name>` sets the name.
struct DatasetManifest {
  std::string name;
  std::filesystem::path root;
  std::vector<std::string> classes;  // order of first appearance
  std::vector<ManifestEntry> entries;

  /// Split names in order of first appearance.
  std::vector<std::string> splits() const;
  /// -1 if the label is unknown.
  int class_index(std::string_view label) const;
  std::filesystem::path resolve(const ManifestEntry& entry) const;
  /// Indices of the entries tagged with `role` in `split`.
  std::vector<std::size_t> entries_for(std::string_view split, SplitRole role) const;
};

/// Parses manifest text. ParseError on malformed lines, unknown roles or a
/// path listed more than once.
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& root,
                               std::string name = {});

/// Checks that every split gives each class at least one train and one test
/// entry (EmptyClass) and, if `check_files`, that every file exists
/// (MissingFile, naming all absent paths).
void validate_manifest(const DatasetManifest& manifest, bool check_files = true);

/// parse_manifest relative to the file's directory, then validate_manifest.
DatasetManifest load_manifest(const std::filesystem::path& path);

std::string format_manifest(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Replaces all split tags with `configs` seeded random partitions named
/// split0..split{configs-1}: per class, `train_per_class` entries train and
/// the rest test. InsufficientImages if a class has <= train_per_class entries.
DatasetManifest make_splits(const DatasetManifest& manifest, int train_per_class, int configs,
                            std::uint64_t seed);

/// Reads an Outex test-suite directory: `classes.txt` plus `NNN/train.txt`
/// and `NNN/test.txt` (a count line, then `<file> <class-index>` lines), with
/// images under `images/`. `image_extension` (e.g. ".png") replaces the
/// listed extension, for suites converted from the original raster format.
DatasetManifest load_outex_layout(const std::filesystem::path& root,
                                  const std::string& image_extension = {});

}  // namespace loadtex
