#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rfcmp/types.hpp"

namespace rfcmp {

/// Settings of one batch run. Read from a flat key=value file; command-line
/// overrides use the same keys.
struct RunConfig {
  std::string command;

  std::string mesh = "sphere";  // sphere | torus | off
  std::string mesh_path;
  double radius = 1.0;
  double torus_major = 1.0;
  double torus_minor = 0.5;
  int torus_n_major = 16;
  int torus_n_minor = 8;
  std::vector<int> levels{2};  // sphere subdivisions, or extra refinements of torus/OFF meshes

  std::vector<double> frequencies;
  std::vector<std::string> formulations{"none", "loop-star", "rfcmp-theory", "rfcmp-impl"};
  std::string preconditioner = "rfcmp-impl";
  std::string solver = "cg";
  double tolerance = 1e-4;
  int max_iterations = 2000;

  std::string excitation = "planewave";  // planewave | voltage-gap
  long gap_edge = 0;
  double theta_step_deg = 1.0;
  bool mie_only = false;

  std::string output_dir = ".";
  std::uint64_t seed = 20240531;
  bool timestamp = true;
  long dense_cap = 3000;

  void set(const std::string& key, const std::string& value);
  void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("bad number for '" + key + "': '" + v + "'");
  return x;
}

inline long parse_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("bad integer for '" + key + "': '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + v + "'");
}

}  // namespace detail

inline void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = detail::trim(raw_key);
  const std::string v = detail::trim(raw_value);
  using namespace detail;
  if (key == "command") command = v;
  else if (key == "mesh") mesh = v;
  else if (key == "mesh_path") mesh_path = v;
  else if (key == "radius") radius = parse_double(key, v);
  else if (key == "torus_major") torus_major = parse_double(key, v);
  else if (key == "torus_minor") torus_minor = parse_double(key, v);
  else if (key == "torus_n_major") torus_n_major = static_cast<int>(parse_long(key, v));
  else if (key == "torus_n_minor") torus_n_minor = static_cast<int>(parse_long(key, v));
  else if (key == "levels") {
    levels.clear();
    for (const auto& s : split_list(v)) levels.push_back(static_cast<int>(parse_long(key, s)));
  } else if (key == "frequencies") {
    frequencies.clear();
    for (const auto& s : split_list(v)) frequencies.push_back(parse_double(key, s));
  } else if (key == "formulations") formulations = split_list(v);
  else if (key == "preconditioner") preconditioner = v;
  else if (key == "solver") solver = v;
  else if (key == "tolerance") tolerance = parse_double(key, v);
  else if (key == "max_iterations") max_iterations = static_cast<int>(parse_long(key, v));
  else if (key == "excitation") excitation = v;
  else if (key == "gap_edge") gap_edge = parse_long(key, v);
  else if (key == "theta_step_deg") theta_step_deg = parse_double(key, v);
  else if (key == "mie_only") mie_only = parse_bool(key, v);
  else if (key == "output_dir") output_dir = v;
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_long(key, v));
  else if (key == "timestamp") timestamp = parse_bool(key, v);
  else if (key == "dense_cap") dense_cap = parse_long(key, v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

inline void RunConfig::validate() const {
  static const std::vector<std::string> known{"none", "loop-star", "rfcmp-theory", "rfcmp-impl"};
  auto is_known = [&](const std::string& f) { return std::find(known.begin(), known.end(), f) != known.end(); };
  if (mesh != "sphere" && mesh != "torus" && mesh != "off") throw ConfigError("mesh must be sphere, torus or off");
  if (mesh == "off" && mesh_path.empty()) throw ConfigError("mesh=off needs mesh_path");
  if (levels.empty()) throw ConfigError("levels must not be empty");
  for (int l : levels)
    if (l < 0) throw ConfigError("levels must be >= 0");
  if (command != "mesh-info" && !(command == "rcs" && mie_only) && frequencies.empty())
    throw ConfigError("frequency list is empty");
  for (double f : frequencies)
    if (!(f > 0.0)) throw ConfigError("frequencies must be > 0");
  for (const auto& f : formulations)
    if (!is_known(f)) throw ConfigError("unknown formulation '" + f + "'");
  if (!is_known(preconditioner)) throw ConfigError("unknown preconditioner '" + preconditioner + "'");
  if (solver != "cg" && solver != "cgs") throw ConfigError("solver must be cg or cgs");
  if (solver == "cg" && preconditioner.rfind("rfcmp", 0) != 0)
    throw ConfigError("cg needs a Hermitian positive definite system; use an rfcmp preconditioner or cgs");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (excitation != "planewave" && excitation != "voltage-gap")
    throw ConfigError("excitation must be planewave or voltage-gap");
  if (!(theta_step_deg > 0.0)) throw ConfigError("theta_step_deg must be > 0");
}

/// Parses key=value lines; '#' starts a comment.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    base.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace rfcmp
