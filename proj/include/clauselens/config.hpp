#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "clauselens/errors.hpp"

namespace clauselens {

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[std::size_t(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Flat "[section] key = value" configuration file. Keys keep insertion
/// order inside a section so the canonical dump is stable; lookups are by
/// "section.key". Lines starting with '#' are comments.
class ConfigFile {
 public:
  void set(const std::string& section, const std::string& key,
           const std::string& value) {
    auto& sec = section_for(section);
    for (auto& kv : sec.entries) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    sec.entries.emplace_back(key, value);
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto* sec = find_section(section);
    if (!sec) return false;
    for (const auto& kv : sec->entries)
      if (kv.first == key) return true;
    return false;
  }

  std::string get(const std::string& section, const std::string& key) const {
    const auto* sec = find_section(section);
    if (sec)
      for (const auto& kv : sec->entries)
        if (kv.first == key) return kv.second;
    throw ConfigError("missing key [" + section + "] " + key);
  }

  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    const std::string raw = get(section, key);
    try {
      std::size_t used = 0;
      double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + " is not a number: '" +
                        raw + "'");
    }
  }

  std::int64_t get_int(const std::string& section,
                       const std::string& key) const {
    const std::string raw = get(section, key);
    try {
      std::size_t used = 0;
      std::int64_t v = std::stoll(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + " is not an integer: '" +
                        raw + "'");
    }
  }

  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get(section, key))) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key +
                          " has a non-numeric item: '" + item + "'");
      }
    }
    return out;
  }

  std::vector<std::string> get_strings(const std::string& section,
                                       const std::string& key) const {
    return split_list(get(section, key));
  }

  /// "name:weight,name:weight" pairs, e.g. jurisdiction mixes.
  std::vector<std::pair<std::string, double>> get_weighted(
      const std::string& section, const std::string& key) const {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& item : split_list(get(section, key))) {
      auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ConfigError("[" + section + "] " + key +
                          " expects name:weight items, got '" + item + "'");
      try {
        out.emplace_back(item.substr(0, colon),
                         std::stod(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key +
                          " has a non-numeric weight in '" + item + "'");
      }
    }
    return out;
  }

  std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    out.reserve(sections_.size());
    for (const auto& s : sections_) out.push_back(s.name);
    return out;
  }

  static ConfigFile parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = trim(line);
      if (s.empty() || s[0] == '#') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw ParseError("config line " + std::to_string(line_no) +
                           ": unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        cfg.section_for(section);
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ParseError("config line " + std::to_string(line_no) +
                         ": expected key = value");
      if (section.empty())
        throw ParseError("config line " + std::to_string(line_no) +
                         ": key outside any [section]");
      cfg.set(section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
  }

  /// Canonical text form; also the digest input when no file was given.
  std::string dump() const {
    std::string out;
    for (const auto& sec : sections_) {
      out += "[" + sec.name + "]\n";
      for (const auto& kv : sec.entries)
        out += kv.first + " = " + kv.second + "\n";
      out += "\n";
    }
    return out;
  }

  std::string digest() const {
    const std::string text = dump();
    return hex64(fnv1a64(text.data(), text.size()));
  }

  /// Overlay: entries of `other` replace or extend this config.
  void merge(const ConfigFile& other) {
    for (const auto& sec : other.sections_)
      for (const auto& kv : sec.entries) set(sec.name, kv.first, kv.second);
  }

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };

  Section& section_for(const std::string& name) {
    for (auto& s : sections_)
      if (s.name == name) return s;
    sections_.push_back(Section{name, {}});
    return sections_.back();
  }

  const Section* find_section(const std::string& name) const {
    for (const auto& s : sections_)
      if (s.name == name) return &s;
    return nullptr;
  }

  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(raw);
    while (std::getline(in, item, ',')) {
      std::string t = trim(item);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  std::vector<Section> sections_;
};

}  // namespace clauselens
