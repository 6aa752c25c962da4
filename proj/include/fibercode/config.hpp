#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fibercode::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Unit { None, Length, Power, Frequency, Time };

// Converts "2000 km", "-4dBm", "100 GHz" ... to SI (m, W, Hz, s). A bare
// number is taken as already in SI.
double parse_quantity(const std::string& text, Unit unit);

// Sectioned key = value text. Keys are addressed as "section.key"; keys
// before any section header live in the empty section and are addressed
// by their bare name. '#' and ';' start comments.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_quantity(const std::string& key, Unit unit, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Whitespace- or comma-separated list of quantities.
  std::vector<double> get_quantity_list(const std::string& key, Unit unit,
                                        const std::vector<double>& fallback) const;
  std::vector<std::string> get_string_list(const std::string& key,
                                           const std::vector<std::string>& fallback) const;

  // Keys never read through the getters above.
  std::vector<std::string> unused_keys() const;

  // Sorted key=value lines; the hash is FNV-1a over this text.
  std::string canonical() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void touch(const std::string& key) const { used_[key] = true; }
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
};

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t value);

}  // namespace fibercode::config
