#pragma once

// Flat key = value run configuration.
//
//   # comment
//   key = value
//
// Keys are unique; later `set` calls (command-line overrides) replace file
// values. Lists are comma separated. The canonical form (sorted key=value
// lines) is what gets echoed into output headers.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hwiener::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunConfig {
 public:
  static RunConfig parse(std::istream& in, const std::string& source = "<input>");
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  /// Applies "key=value" overrides.
  void apply_overrides(const std::vector<std::string>& assignments);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;

  /// Throws ConfigError naming the first key not in `allowed` (prefix matches
  /// for entries ending in '.').
  void require_known(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  std::string canonical() const;

 private:
  std::string raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

/// Parses a real, accepting inf / -inf.
double parse_double(const std::string& text, const std::string& what);
std::vector<double> parse_doubles(const std::string& text, const std::string& what, char sep = ',');

}  // namespace hwiener::harness
