#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "error.hpp"
#include "pipeline.hpp"

using namespace knotmorse;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.toml");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  FAIL("no error for:\n" << text);
  return {};
}

}  // namespace

TEST_CASE("minimal configuration takes defaults") {
  const RunConfig c = parse_config("[knot]\nbuiltin = \"paper_trefoil\"\n");
  CHECK(c.knot.builtin == "paper_trefoil");
  CHECK(c.knot.params.empty());
  CHECK(c.quadrature.panels == 16);
  CHECK(c.quadrature.nodes_per_panel == 16);
  CHECK(c.search.grid_resolution == 13);
  CHECK(c.search.random_seeds == 500);
  CHECK(c.search.newton_tol == 1e-10);
  CHECK(c.surface.base_resolution == 128);
  CHECK(c.surface.stability_check);
  CHECK(c.epsilon.gap_fraction == 0.4);
  CHECK(std::isinf(c.epsilon.cap));
  CHECK(c.output.write_meshes);
}

TEST_CASE("every section is read") {
  const RunConfig c = parse_config(R"(
threads = 3
[knot]
builtin = "torus_knot"
params = [2, 3, 2.5, 1]
[quadrature]
panels = 8
nodes_per_panel = 12
refine_depth = 4
min_distance = 0.01
[search]
grid_resolution = 9
random_seeds = 10
rng_seed = 77
newton_tol = 1e-9
max_iter = 50
dedup_tol = 1e-5
degenerate_tol = 1e-7
probe_fraction = 0.5
[surface]
resolution = 64
max_resolution = 512
cells_per_feature = 2
margin = 0.2
stability_check = false
[morse]
cluster_tol = 1e-4
gap_fraction = 0.3
epsilon_cap = 0.5
[output]
dir = "somewhere"
report = "r.json"
mesh_dir = "m"
write_meshes = false
)");
  CHECK(c.threads == 3);
  CHECK(c.knot.params == std::vector<double>{2, 3, 2.5, 1});
  CHECK(c.quadrature.panels == 8);
  CHECK(c.quadrature.nodes_per_panel == 12);
  CHECK(c.quadrature.refine_depth == 4);
  CHECK(c.quadrature.min_distance == 0.01);
  CHECK(c.search.grid_resolution == 9);
  CHECK(c.search.random_seeds == 10);
  CHECK(c.search.rng_seed == 77);
  CHECK(c.search.newton_tol == 1e-9);
  CHECK(c.search.max_iter == 50);
  CHECK(c.search.dedup_tol == 1e-5);
  CHECK(c.search.degenerate_tol == 1e-7);
  CHECK(c.search.probe_fraction == 0.5);
  CHECK(c.surface.base_resolution == 64);
  CHECK(c.surface.max_resolution == 512);
  CHECK(c.surface.cells_per_feature == 2.0);
  CHECK(c.surface.margin == 0.2);
  CHECK_FALSE(c.surface.stability_check);
  CHECK(c.cluster_tol == 1e-4);
  CHECK(c.epsilon.gap_fraction == 0.3);
  CHECK(c.epsilon.cap == 0.5);
  CHECK(c.output.dir == "somewhere");
  CHECK(c.output.report == "r.json");
  CHECK(c.output.mesh_dir == "m");
  CHECK_FALSE(c.output.write_meshes);

  // Serialising and reading back gives the same configuration.
  const RunConfig d = parse_config(to_toml(c));
  CHECK(to_toml(d) == to_toml(c));
  CHECK(d.knot.params == c.knot.params);
  CHECK(d.search.rng_seed == c.search.rng_seed);
}

TEST_CASE("expression knots round-trip through TOML") {
  RunConfig c = parse_config("[knot]\nexpression = \"(cos(t), sin(t), 0.25*sin(2*t))\"\n");
  CHECK(make_curve(c.knot).point(0.3).z() == doctest::Approx(0.25 * std::sin(0.6)));
  c.knot.expression = "(cos(t), sin(t), \"q\\\\\")";
  CHECK(parse_config(to_toml(c)).knot.expression == c.knot.expression);
}

TEST_CASE("configuration errors name the line") {
  CHECK(config_error("[knot\nbuiltin = 1\n").find("test.toml:1:") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\ncolour = 3\n").find("test.toml:3:") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\nexpression = \"(t,t,t)\"\n").find("exactly one") != std::string::npos);
  CHECK(config_error("[knot]\n").find("exactly one") != std::string::npos);
  CHECK(config_error("threads = 1\n").find("[knot]") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\n[search]\nnewton_tol = -1\n").find(":4:") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\n[search]\nnewton_tol = \"small\"\n").find("number") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\n[surface]\nresolution = 8\n").find("resolution") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\nparams = [\"a\"]\n").find("params") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\n[morse]\ngap_fraction = 1.5\n").find("gap_fraction") != std::string::npos);
  CHECK(config_error("[knot]\nbuiltin = \"circle\"\n[quadrature]\npanels = 2.5\n").find("integer") != std::string::npos);
  CHECK(config_error("knot = 3\n").find("table") != std::string::npos);
}

TEST_CASE("loading from disk") {
  const auto path = std::filesystem::temp_directory_path() / "knotmorse_test_config.toml";
  {
    std::ofstream os(path);
    os << "[knot]\nbuiltin = \"circle\"\nparams = [2]\n";
  }
  CHECK(load_config(path).knot.params == std::vector<double>{2});
  std::filesystem::remove(path);
  try {
    load_config(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

TEST_CASE("perturbed configuration") {
  const RunConfig c = parse_config("[knot]\nbuiltin = \"paper_trefoil\"\n");
  const RunConfig p = perturbed_config(c, 0.05, 42);
  CHECK(p.knot.builtin.empty());
  CHECK(p.output.report == "report_perturbed.json");
  const KnotCurve direct = perturb(builtin_curve("paper_trefoil"), 0.05, 42);
  const KnotCurve via = make_curve(parse_config(to_toml(p)).knot);
  for (double t = 0; t < kTwoPi; t += 0.25) CHECK((via.point(t) - direct.point(t)).norm() < 1e-14);
  CHECK_THROWS_AS(perturbed_config(c, -0.1, 1), Error);
}
