#include "loadtex/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "loadtex/error.hpp"
#include "loadtex/image_io.hpp"

namespace loadtex {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string role_name(SplitRole role) { return role == SplitRole::Train ? "train" : "test"; }

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

std::vector<std::string> DatasetManifest::splits() const {
  std::vector<std::string> names;
  for (const auto& e : entries) {
    for (const auto& t : e.tags) {
      if (std::find(names.begin(), names.end(), t.split) == names.end()) names.push_back(t.split);
    }
  }
  return names;
}

int DatasetManifest::class_index(std::string_view label) const {
  const auto it = std::find(classes.begin(), classes.end(), label);
  return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
}

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& entry) const {
  const std::filesystem::path p(entry.path);
  return p.is_absolute() ? p : root / p;
}

std::vector<std::size_t> DatasetManifest::entries_for(std::string_view split, SplitRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (const auto& t : entries[i].tags) {
      if (t.split == split && t.role == role) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& root,
                               std::string name) {
  DatasetManifest m;
  m.root = root;
  m.name = std::move(name);
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  for (std::string_view raw : split_on(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    const std::string where = "manifest line " + std::to_string(line_no);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      if (body.starts_with("name:")) m.name = std::string(trim(body.substr(5)));
      continue;
    }
    const auto fields = split_on(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw Error(Errc::ParseError, where + ": expected <path>\\t<label>[\\t<tags>]");
    }
    ManifestEntry e;
    e.path = std::string(trim(fields[0]));
    e.label = std::string(trim(fields[1]));
    if (e.path.empty() || e.label.empty()) throw Error(Errc::ParseError, where + ": empty path or label");
    if (fields.size() == 3 && !trim(fields[2]).empty()) {
      for (std::string_view tag : split_on(trim(fields[2]), ',')) {
        tag = trim(tag);
        const auto colon = tag.rfind(':');
        if (colon == std::string_view::npos || colon == 0) {
          throw Error(Errc::ParseError, where + ": tag '" + std::string(tag) + "' is not <split>:<role>");
        }
        const std::string_view role = tag.substr(colon + 1);
        SplitTag t{std::string(tag.substr(0, colon)), SplitRole::Train};
        if (role == "test") t.role = SplitRole::Test;
        else if (role != "train") throw Error(Errc::ParseError, where + ": unknown role '" + std::string(role) + "'");
        for (const auto& other : e.tags) {
          if (other.split == t.split) {
            throw Error(Errc::ParseError, where + ": split '" + t.split + "' tagged twice");
          }
        }
        e.tags.push_back(std::move(t));
      }
    }
    if (const auto it = seen.find(e.path); it != seen.end()) {
      const auto& first = m.entries[it->second];
      throw Error(Errc::ParseError, where + ": path '" + e.path + "' already listed" +
                                        (first.label != e.label ? " under label '" + first.label +
                                                                      "' (ambiguous label)"
                                                                : std::string()));
    }
    seen.emplace(e.path, m.entries.size());
    if (m.class_index(e.label) < 0) m.classes.push_back(e.label);
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw Error(Errc::ParseError, "manifest has no entries");
  return m;
}

void validate_manifest(const DatasetManifest& manifest, bool check_files) {
  if (check_files) {
    std::string missing;
    std::size_t count = 0;
    for (const auto& e : manifest.entries) {
      if (!std::filesystem::exists(manifest.resolve(e))) {
        missing += (count++ ? ", " : "") + manifest.resolve(e).string();
      }
    }
    if (count > 0) throw Error(Errc::MissingFile, missing);
  }
  for (const auto& split : manifest.splits()) {
    for (const auto role : {SplitRole::Train, SplitRole::Test}) {
      std::vector<int> per_class(manifest.classes.size(), 0);
      for (std::size_t i : manifest.entries_for(split, role)) {
        ++per_class[static_cast<std::size_t>(manifest.class_index(manifest.entries[i].label))];
      }
      for (std::size_t c = 0; c < per_class.size(); ++c) {
        if (per_class[c] == 0) {
          throw Error(Errc::EmptyClass, "class '" + manifest.classes[c] + "' has no " +
                                            role_name(role) + " entry in split '" + split + "'");
        }
      }
    }
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, path.string());
  DatasetManifest m = parse_manifest(read_text(path), path.parent_path(), path.stem().string());
  validate_manifest(m, true);
  return m;
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out = "# name: " + manifest.name + "\n";
  for (const auto& e : manifest.entries) {
    out += e.path + "\t" + e.label + "\t";
    for (std::size_t i = 0; i < e.tags.size(); ++i) {
      out += (i ? "," : "") + e.tags[i].split + ":" + role_name(e.tags[i].role);
    }
    out += "\n";
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::string text = format_manifest(manifest);
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

DatasetManifest make_splits(const DatasetManifest& manifest, int train_per_class, int configs,
                            std::uint64_t seed) {
  if (train_per_class < 1 || configs < 1) {
    throw Error(Errc::ConfigError, "train_per_class and configs must be positive");
  }
  std::vector<std::vector<std::size_t>> by_class(manifest.classes.size());
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    by_class[static_cast<std::size_t>(manifest.class_index(manifest.entries[i].label))].push_back(i);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (static_cast<int>(by_class[c].size()) <= train_per_class) {
      throw Error(Errc::InsufficientImages, "class '" + manifest.classes[c] + "' has " +
                                                std::to_string(by_class[c].size()) +
                                                " images, need more than " +
                                                std::to_string(train_per_class));
    }
  }
  DatasetManifest out = manifest;
  for (auto& e : out.entries) e.tags.clear();
  for (int k = 0; k < configs; ++k) {
    const std::string name = "split" + std::to_string(k);
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1));
    for (const auto& members : by_class) {
      std::vector<std::size_t> order = members;
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t j = 0; j < order.size(); ++j) {
        const auto role = static_cast<int>(j) < train_per_class ? SplitRole::Train : SplitRole::Test;
        out.entries[order[j]].tags.push_back(SplitTag{name, role});
      }
    }
  }
  return out;
}

DatasetManifest load_outex_layout(const std::filesystem::path& root,
                                  const std::string& image_extension) {
  const auto classes_file = root / "classes.txt";
  if (!std::filesystem::exists(classes_file)) throw Error(Errc::MissingFile, classes_file.string());
  std::map<int, std::string> class_names;
  {
    std::istringstream in(read_text(classes_file));
    std::size_t count = 0;
    in >> count;
    std::string name;
    int index = 0;
    while (in >> name >> index) class_names[index] = name;
    if (class_names.size() != count) {
      throw Error(Errc::ParseError, classes_file.string() + ": expected " + std::to_string(count) + " classes");
    }
  }

  DatasetManifest m;
  m.root = root / "images";
  m.name = root.filename().string();
  std::map<std::string, std::size_t> index_of;
  std::vector<std::filesystem::path> problems;
  for (const auto& dir : std::filesystem::directory_iterator(root)) {
    if (dir.is_directory() && std::filesystem::exists(dir.path() / "train.txt")) problems.push_back(dir.path());
  }
  std::sort(problems.begin(), problems.end());
  if (problems.empty()) throw Error(Errc::ParseError, root.string() + ": no NNN/train.txt problem folders");

  for (const auto& problem : problems) {
    const std::string split = problem.filename().string();
    for (const auto role : {SplitRole::Train, SplitRole::Test}) {
      const auto list = problem / (role_name(role) + ".txt");
      std::istringstream in(read_text(list));
      std::size_t count = 0;
      in >> count;
      std::string file;
      int cls = 0;
      std::size_t read = 0;
      while (in >> file >> cls) {
        ++read;
        const auto it = class_names.find(cls);
        if (it == class_names.end()) throw Error(Errc::ParseError, list.string() + ": unknown class " + std::to_string(cls));
        if (!image_extension.empty()) file = std::filesystem::path(file).replace_extension(image_extension).string();
        auto [pos, inserted] = index_of.emplace(file, m.entries.size());
        if (inserted) {
          m.entries.push_back(ManifestEntry{file, it->second, {}});
          if (m.class_index(it->second) < 0) m.classes.push_back(it->second);
        } else if (m.entries[pos->second].label != it->second) {
          throw Error(Errc::ParseError, list.string() + ": '" + file + "' has conflicting labels");
        }
        m.entries[pos->second].tags.push_back(SplitTag{split, role});
      }
      if (read != count) throw Error(Errc::ParseError, list.string() + ": expected " + std::to_string(count) + " entries");
    }
  }
  validate_manifest(m, true);
  return m;
}

}  // namespace loadtex
