#include "tse/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tse::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(',', start);
    const std::string item =
        trim(pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  return parse(in, path);
}

Config Config::parse(std::istream& in, const std::string& name) {
  Config cfg;
  cfg.name_ = name;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip trailing comment
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(name, lineno, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(name, lineno, "empty section name");
      cfg.sections_[section];  // section may legitimately stay empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name, lineno, "expected key = value");
    if (section.empty())
      throw ConfigError(name, lineno, "key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(name, lineno, "empty key");
    auto [it, inserted] = cfg.sections_[section].emplace(key, Entry{value, lineno});
    if (!inserted)
      throw ConfigError(name, lineno,
                        "duplicate key '" + key + "' in [" + section + "]");
  }
  return cfg;
}

const Config::Entry* Config::find(const std::string& section,
                                  const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  return kit == sit->second.end() ? nullptr : &kit->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void Config::fail(const std::string& section, const std::string& key,
                  const std::string& msg) const {
  const Entry* e = find(section, key);
  throw ConfigError(name_, e ? e->line : 0, "[" + section + "] " + key + ": " + msg);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  char* end = nullptr;
  const double v = std::strtod(e->value.c_str(), &end);
  if (end == e->value.c_str() || *end != '\0')
    fail(section, key, "not a number: '" + e->value + "'");
  return v;
}

int Config::get_int(const std::string& section, const std::string& key,
                    int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  char* end = nullptr;
  const long v = std::strtol(e->value.c_str(), &end, 10);
  if (end == e->value.c_str() || *end != '\0')
    fail(section, key, "not an integer: '" + e->value + "'");
  return static_cast<int>(v);
}

std::vector<std::string> Config::get_string_list(
    const std::string& section, const std::string& key,
    const std::vector<std::string>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  return split_list(e->value);
}

std::vector<double> Config::get_double_list(const std::string& section,
                                            const std::string& key,
                                            const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      fail(section, key, "not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key,
                                      const std::vector<int>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(e->value)) {
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0')
      fail(section, key, "not an integer: '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::uint64_t> Config::get_u64_list(
    const std::string& section, const std::string& key,
    const std::vector<std::uint64_t>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(e->value)) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0')
      fail(section, key, "not an unsigned integer: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void Config::require_known_keys(
    const std::map<std::string, std::vector<std::string>>& schema) const {
  for (const auto& [section, keys] : sections_) {
    const auto sit = schema.find(section);
    if (sit == schema.end())
      throw ConfigError(name_, keys.empty() ? 0 : keys.begin()->second.line,
                        "unknown section [" + section + "]");
    for (const auto& [key, entry] : keys) {
      if (std::find(sit->second.begin(), sit->second.end(), key) == sit->second.end())
        throw ConfigError(name_, entry.line,
                          "unknown key '" + key + "' in [" + section + "]");
    }
  }
}

}  // namespace tse::cli
