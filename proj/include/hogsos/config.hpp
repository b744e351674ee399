#pragma once

// Tool configuration. Defaults < config file < HOGSOS_* environment
// variables < command-line flags, the CLI applies the last layer itself.
//
// File format: one `key = value` per line, `#` starts a comment, blank
// lines ignored. Keys match the struct fields below.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "hogsos/error.hpp"

namespace hogsos {

struct Config {
  int depth = 6;        // observation depth for bisim / denote / suites
  int probe_size = 4;   // max size of probe terms
  int term_size = 8;    // max size of sampled terms
  int samples = 500;    // sample count for suites
  int fuel = 100;       // step budget for traces and shape classification
  std::uint64_t seed = 42;
  int pool_cap = 40;    // probes kept per sort (smallest first); 0 = no cap
  std::string format = "text";  // text | json | dot
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline long long to_int(const std::string& key, const std::string& val, long long lo,
                        long long hi) {
  size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(val, &pos);
  } catch (const std::exception&) {
    fail(errc::config_error, key + ": expected an integer, got '" + val + "'");
  }
  if (pos != val.size())
    fail(errc::config_error, key + ": trailing junk in '" + val + "'");
  if (v < lo || v > hi)
    fail(errc::config_error, key + ": " + val + " out of range [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
  return v;
}

inline void set_key(Config& c, const std::string& key, const std::string& val) {
  if (key == "depth")
    c.depth = static_cast<int>(to_int(key, val, 0, 64));
  else if (key == "probe_size")
    c.probe_size = static_cast<int>(to_int(key, val, 1, 64));
  else if (key == "term_size")
    c.term_size = static_cast<int>(to_int(key, val, 1, 64));
  else if (key == "samples")
    c.samples = static_cast<int>(to_int(key, val, 0, 10000000));
  else if (key == "fuel")
    c.fuel = static_cast<int>(to_int(key, val, 0, 100000000));
  else if (key == "seed")
    c.seed = static_cast<std::uint64_t>(to_int(key, val, 0, 4611686018427387903LL));
  else if (key == "pool_cap")
    c.pool_cap = static_cast<int>(to_int(key, val, 0, 1000000));
  else if (key == "format") {
    if (val != "text" && val != "json" && val != "dot")
      fail(errc::config_error, "format: expected text, json or dot, got '" + val + "'");
    c.format = val;
  } else {
    fail(errc::config_error, "unknown config key '" + key + "'");
  }
}

}  // namespace config_detail

inline void apply_config_file(Config& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::config_error, "cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::config_error,
           path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = config_detail::trim(line.substr(0, eq));
    std::string val = config_detail::trim(line.substr(eq + 1));
    if (key.empty()) fail(errc::config_error, path + ":" + std::to_string(lineno) + ": empty key");
    config_detail::set_key(c, key, val);
  }
}

inline void apply_env(Config& c) {
  static const std::map<std::string, std::string> keys = {
      {"HOGSOS_DEPTH", "depth"},         {"HOGSOS_PROBE_SIZE", "probe_size"},
      {"HOGSOS_TERM_SIZE", "term_size"}, {"HOGSOS_SAMPLES", "samples"},
      {"HOGSOS_FUEL", "fuel"},           {"HOGSOS_SEED", "seed"},
      {"HOGSOS_POOL_CAP", "pool_cap"},   {"HOGSOS_FORMAT", "format"},
  };
  for (const auto& [env, key] : keys)
    if (const char* v = std::getenv(env.c_str())) config_detail::set_key(c, key, v);
}

// Layers below the command line: defaults, then the file (explicit path, or
// HOGSOS_CONFIG, or ./hogsos.conf when present), then the environment.
inline Config load_config(const std::string& explicit_path = "") {
  Config c;
  std::string path = explicit_path;
  if (path.empty()) {
    if (const char* p = std::getenv("HOGSOS_CONFIG")) path = p;
  }
  if (path.empty()) {
    std::ifstream probe("hogsos.conf");
    if (probe) path = "hogsos.conf";
  }
  if (!path.empty()) apply_config_file(c, path);
  apply_env(c);
  return c;
}

}  // namespace hogsos
