#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "critical.hpp"
#include "field.hpp"
#include "morse.hpp"

namespace knotmorse {

// Exactly one of `builtin` and `expression` is non-empty.
struct KnotSpec {
  std::string builtin;
  std::vector<double> params;
  std::string expression;
};

struct OutputConfig {
  std::filesystem::path dir = ".";
  std::string report = "report.json";  // relative to dir
  std::string mesh_dir = "meshes";     // relative to dir
  bool write_meshes = true;
};

// A run as described by a TOML file with sections [knot], [quadrature],
// [search], [surface], [morse], [output] and an optional top-level `threads`.
struct RunConfig {
  KnotSpec knot;
  FieldOptions quadrature;
  SearchConfig search;
  GridPolicy surface;
  double cluster_tol = 0.0;  // <= 0: default_cluster_tol
  EpsilonPolicy epsilon;
  OutputConfig output;
  unsigned threads = 0;
};

// Throws Error{Config} with "<source>:<line>:<column>: message" for
// malformed TOML, unknown keys, wrong types and out-of-range values.
RunConfig parse_config(const std::string& text, const std::string& source_name = "config");
RunConfig load_config(const std::filesystem::path& path);

// TOML text that parse_config reads back to an equal configuration.
std::string to_toml(const RunConfig& config);

KnotCurve make_curve(const KnotSpec& knot);

}  // namespace knotmorse
