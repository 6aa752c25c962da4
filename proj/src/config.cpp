#include "fibercode/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fibercode::config {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

double parse_quantity(const std::string& text, Unit unit) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty quantity");
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + t + "'");
  }
  const std::string suffix = trim(t.substr(used));
  if (!std::isfinite(value)) throw ConfigError("non-finite quantity: '" + t + "'");
  if (suffix.empty()) return value;

  auto bad = [&] { return ConfigError("unit '" + suffix + "' not valid here: '" + t + "'"); };
  switch (unit) {
    case Unit::None:
      throw bad();
    case Unit::Length:
      if (suffix == "m") return value;
      if (suffix == "km") return value * 1e3;
      throw bad();
    case Unit::Power:
      if (suffix == "W") return value;
      if (suffix == "mW") return value * 1e-3;
      if (suffix == "dBm") return 1e-3 * std::pow(10.0, value / 10.0);
      throw bad();
    case Unit::Frequency:
      if (suffix == "Hz") return value;
      if (suffix == "kHz") return value * 1e3;
      if (suffix == "MHz") return value * 1e6;
      if (suffix == "GHz") return value * 1e9;
      if (suffix == "THz") return value * 1e12;
      throw bad();
    case Unit::Time:
      if (suffix == "s") return value;
      if (suffix == "ms") return value * 1e-3;
      if (suffix == "us") return value * 1e-6;
      if (suffix == "ns") return value * 1e-9;
      if (suffix == "ps") return value * 1e-12;
      throw bad();
  }
  throw bad();
}

Config Config::parse(std::istream& in, const std::string& origin) {
  Config cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where() + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where() + "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) throw ConfigError(where() + "duplicate key " + full);
    cfg.values_[full] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse(in, path);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  touch(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
  touch(key);
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key " + key);
  return it->second;
}

double Config::get_quantity(const std::string& key, Unit unit, double fallback) const {
  touch(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_quantity(it->second, unit);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

long long Config::get_int(const std::string& key, long long fallback) const {
  touch(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = trim(it->second);
  std::size_t used = 0;
  long long out = 0;
  try {
    // Accept 1e6-style counts as long as they are integral.
    const double d = std::stod(v, &used);
    if (used != v.size() || d != std::floor(d) || std::fabs(d) > 9e18) throw ConfigError("");
    out = static_cast<long long>(d);
    if (v.find_first_of(".eE") == std::string::npos) out = std::stoll(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  touch(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = lower(trim(it->second));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + it->second + "'");
}

std::vector<std::string> Config::get_string_list(const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
  touch(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  for (auto& c : v)
    if (c == ',') c = ' ';
  std::istringstream is(v);
  std::vector<std::string> out;
  std::string item;
  while (is >> item) out.push_back(item);
  return out;
}

std::vector<double> Config::get_quantity_list(const std::string& key, Unit unit,
                                              const std::vector<double>& fallback) const {
  if (!has(key)) {
    touch(key);
    return fallback;
  }
  // Units may be attached ("-4dBm") or follow as their own token ("-4 dBm").
  const auto tokens = get_string_list(key, {});
  std::vector<double> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string item = tokens[i];
    if (i + 1 < tokens.size() && std::isalpha(static_cast<unsigned char>(tokens[i + 1].front())))
      item += tokens[++i];
    try {
      out.push_back(parse_quantity(item, unit));
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t Config::hash() const { return fnv1a64(canonical()); }

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace fibercode::config
