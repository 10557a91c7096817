#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "correlation.hpp"
#include "errors.hpp"
#include "process.hpp"

namespace gstorage {

/// Flat key=value configuration. Blank lines and '#' comments are ignored;
/// later assignments win, so command-line flags are merged on top of a file.
class KeyValueConfig {
 public:
  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "family", "hurst", "c", "R", "R_scale", "R_alpha",                     // process
        "delta", "T", "u", "reps", "seed", "stream", "safety", "tail_eps",    // experiment
        "max_steps", "horizon_n", "workers", "output", "kind", "probes",      //
        "H_delta", "H_continuous", "H_window", "G_window",                    // constants
        "xi", "xi_scale", "S", "S_grid", "estimator", "functional"};          // pickands
    return keys;
  }

  static KeyValueConfig parse(std::string_view text, std::string_view origin = "config") {
    KeyValueConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto key_end = line.find('=');
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (key_end == std::string::npos)
        throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) +
                          ": expected key=value, got '" + trimmed + "'");
      cfg.set(trim(line.substr(0, key_end)), trim(line.substr(key_end + 1)));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  void set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("unknown configuration key '" + key + "'");
    values_[key] = value;
  }

  void merge(const KeyValueConfig& over) {
    for (const auto& [k, v] : over.values_) values_[k] = v;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const { return to_double(key, require(key)); }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string s = require(key);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("key '" + key + "' expects a non-negative integer, got '" + s + "'");
    return v;
  }

  /// Comma-separated list of numbers.
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(require(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(to_double(key, item));
    }
    if (out.empty()) throw ConfigError("key '" + key + "' expects a list of numbers");
    return out;
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  static double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("key '" + key + "' expects a number, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
};

inline Correlation correlation_from_config(const KeyValueConfig& cfg) {
  const std::string name = cfg.get("R", "exp");
  const double scale = cfg.number("R_scale", 1.0);
  if (name == "exp") return exp_correlation(scale);
  if (name == "gauss") return gauss_correlation(scale);
  if (name == "power") return power_correlation(cfg.number("R_alpha"), scale);
  throw ConfigError("unknown correlation R='" + name + "' (expected exp, gauss or power)");
}

/// family=fbm hurst=.. c=..; family=integrated_srd R=exp|gauss R_scale=..;
/// family=integrated_lrd R=power R_alpha=.. R_scale=..
inline ProcessSpec process_from_config(const KeyValueConfig& cfg) {
  const std::string family = cfg.require("family");
  const double c = cfg.number("c", 1.0);
  if (family == "fbm") return make_fbm(cfg.number("hurst"), c);
  if (family == "integrated_srd") return make_integrated_srd(correlation_from_config(cfg), c);
  if (family == "integrated_lrd") {
    KeyValueConfig copy = cfg;
    if (!copy.has("R")) copy.set("R", "power");
    const auto corr = correlation_from_config(copy);
    return make_integrated_lrd(corr, copy.number("R_alpha"), c);
  }
  throw ConfigError("unknown family '" + family + "' (expected fbm, integrated_srd, integrated_lrd)");
}

}  // namespace gstorage
