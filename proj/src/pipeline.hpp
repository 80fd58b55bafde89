#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace knotmorse {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

struct CriticalStage {
  FieldEvaluator field;
  std::vector<CriticalPoint> points;
  double cluster_tol = 0.0;
  std::vector<CriticalCluster> clusters;
  double seconds = 0.0;
};

CriticalStage run_critical_stage(const RunConfig& config);

struct AnalyzeResult {
  Json report;
  bool all_passed = false;
  std::filesystem::path report_path;
};

// Full pipeline. Writes the JSON report (and OBJ meshes when enabled) under
// config.output.dir, then returns. Verification failures are reported, not
// thrown; numerical failures throw knotmorse::Error.
AnalyzeResult analyze(const RunConfig& config);

struct TableResult {
  Json json;
  std::string text;  // human-readable table
};

// Critical points only.
TableResult critical(const RunConfig& config);

// Extracts the given levels after checking that each is at least 1e-3
// (relative) away from every critical value. Writes one OBJ per level when
// meshes are enabled.
TableResult surfaces(const RunConfig& config, const std::vector<double>& levels);

// Copy of `config` whose knot is the perturbed curve, as an expression. The
// report and mesh directory get a "_perturbed" suffix.
RunConfig perturbed_config(const RunConfig& config, double amplitude, std::uint64_t seed);

// Report with the timings removed, for determinism comparisons.
Json without_timings(Json report);

void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace knotmorse
