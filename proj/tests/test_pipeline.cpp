#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "error.hpp"
#include "pipeline.hpp"

using namespace knotmorse;

namespace {

// Directories handed out here are removed again when the test binary exits.
struct ScratchDirs {
  std::vector<std::filesystem::path> dirs;
  ~ScratchDirs() {
    std::error_code ec;
    for (const auto& d : dirs) std::filesystem::remove_all(d, ec);
  }
};

std::filesystem::path scratch(const std::string& name) {
  static ScratchDirs registry;
  const auto dir = std::filesystem::temp_directory_path() / ("knotmorse_pipeline_" + name);
  std::filesystem::remove_all(dir);
  registry.dirs.push_back(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig quick(const std::string& knot_lines, const std::string& name) {
  RunConfig c = parse_config("[knot]\n" + knot_lines + "\n[surface]\nstability_check = false\n");
  c.output.dir = scratch(name);
  return c;
}

}  // namespace

TEST_CASE("circle analysis report") {
  RunConfig c = quick("builtin = \"circle\"", "circle");
  const AnalyzeResult r = analyze(c);
  CHECK(r.all_passed);
  REQUIRE(std::filesystem::exists(r.report_path));
  const Json j = Json::parse(slurp(r.report_path));
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["morse_code"]["genera"] == Json::array({0, 1}));
  CHECK(j["critical_points"].size() == 1);
  CHECK(j["verification"]["checks"].size() == 7);
  CHECK(j["surfaces"].size() == 2);
  for (const auto& s : j["surfaces"]) {
    REQUIRE(s.contains("mesh"));
    CHECK(std::filesystem::exists(c.output.dir / s["mesh"].get<std::string>()));
  }
  CHECK(j.contains("timings"));
  CHECK_FALSE(std::filesystem::exists(r.report_path.string() + ".tmp"));
}

TEST_CASE("reports are deterministic apart from timings") {
  RunConfig c = quick("builtin = \"circle\"", "determinism");
  c.output.write_meshes = false;
  const Json a = without_timings(analyze(c).report);
  c.threads = 1;
  const Json b = without_timings(analyze(c).report);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("zero-amplitude perturbation leaves the analysis unchanged") {
  RunConfig c = quick("builtin = \"circle\"", "zero_perturb");
  c.output.write_meshes = false;
  const Json a = analyze(c).report;
  const Json b = analyze(perturbed_config(c, 0.0, 5)).report;
  CHECK(a["critical_points"].dump() == b["critical_points"].dump());
  CHECK(a["surfaces"].dump() == b["surfaces"].dump());
  CHECK(a["morse_code"] == b["morse_code"]);
}

TEST_CASE("trefoil code does not depend on the search seed") {
  RunConfig c = quick("builtin = \"paper_trefoil\"\n[search]\nrng_seed = 12345", "trefoil_seed");
  c.output.write_meshes = false;
  const AnalyzeResult r = analyze(c);
  CHECK(r.report["morse_code"]["genera"] == Json::array({0, 3, 4, 1}));
  CHECK(r.all_passed);
}

TEST_CASE("critical table") {
  const TableResult t = critical(quick("builtin = \"circle\"", "critical"));
  CHECK(t.json["critical_points"].size() == 1);
  CHECK(t.text.find("6.283185307") != std::string::npos);
  CHECK(t.text.find("1 critical point(s)") != std::string::npos);
}

TEST_CASE("surfaces at explicit levels") {
  RunConfig c = quick("builtin = \"circle\"", "surfaces");
  const TableResult t = surfaces(c, {6.0, 7.0});
  REQUIRE(t.json["surfaces"].size() == 2);
  CHECK(t.json["surfaces"][0]["total_genus"] == 0);
  CHECK(t.json["surfaces"][1]["total_genus"] == 1);
  CHECK(std::filesystem::exists(c.output.dir / "meshes" / "level_00.obj"));
  try {
    surfaces(c, {6.2832});
    FAIL("expected LevelNotRegular");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LevelNotRegular);
    CHECK(std::string(e.what()).find("6.28318530") != std::string::npos);
  }
  CHECK_THROWS_AS(surfaces(c, {}), Error);
  CHECK_THROWS_AS(surfaces(c, {-1.0}), Error);
}
