#ifndef TSE_CONFIG_HPP
#define TSE_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tse::cli {

/// Config parse/validation failure carrying "file:line: message".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Line-oriented sectioned key=value file:
///   [section]
///   key = value            # trailing comments allowed
///   list = a, b, c
/// Blank lines and lines starting with '#' are skipped. Keys must be unique
/// within their section.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse_file(const std::string& path);
  static Config parse(std::istream& in, const std::string& name);

  const std::string& name() const { return name_; }
  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                const std::vector<int>& fallback) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key,
                                           const std::vector<std::string>& fallback) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& section,
                                          const std::string& key,
                                          const std::vector<std::uint64_t>& fallback) const;

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& msg) const;

  /// Rejects any key outside the allowed (section, key) set; used by the
  /// experiment loader so typos surface with their line number.
  void require_known_keys(
      const std::map<std::string, std::vector<std::string>>& schema) const;

  const std::map<std::string, std::map<std::string, Entry>>& sections() const {
    return sections_;
  }

 private:
  const Entry* find(const std::string& section, const std::string& key) const;

  std::string name_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace tse::cli

#endif  // TSE_CONFIG_HPP
