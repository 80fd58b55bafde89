#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace knotmorse {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json config_json(const RunConfig& c) {
  Json knot;
  if (!c.knot.builtin.empty()) {
    knot["builtin"] = c.knot.builtin;
    knot["params"] = c.knot.params;
  } else {
    knot["expression"] = c.knot.expression;
  }
  Json j;
  j["knot"] = knot;
  j["quadrature"] = {{"panels", c.quadrature.panels},
                     {"nodes_per_panel", c.quadrature.nodes_per_panel},
                     {"refine_depth", c.quadrature.refine_depth},
                     {"min_distance", c.quadrature.min_distance}};
  j["search"] = {{"grid_resolution", c.search.grid_resolution},
                 {"random_seeds", c.search.random_seeds},
                 {"rng_seed", c.search.rng_seed},
                 {"newton_tol", c.search.newton_tol},
                 {"max_iter", c.search.max_iter},
                 {"dedup_tol", c.search.dedup_tol},
                 {"degenerate_tol", c.search.degenerate_tol},
                 {"probe_fraction", c.search.probe_fraction}};
  j["surface"] = {{"resolution", c.surface.base_resolution},
                  {"max_resolution", c.surface.max_resolution},
                  {"cells_per_feature", c.surface.cells_per_feature},
                  {"margin", c.surface.margin},
                  {"stability_check", c.surface.stability_check}};
  // JSON has no infinity; an unbounded cap is written as null.
  j["morse"] = {{"cluster_tol", c.cluster_tol},
                {"gap_fraction", c.epsilon.gap_fraction},
                {"epsilon_cap", std::isfinite(c.epsilon.cap) ? Json(c.epsilon.cap) : Json()}};
  j["output"] = {{"report", c.output.report},
                 {"mesh_dir", c.output.mesh_dir},
                 {"write_meshes", c.output.write_meshes}};
  return j;
}

Json point_json(const CriticalPoint& p) {
  return {{"position", vec(p.position)},
          {"value", p.value},
          {"index", p.index},
          {"eigenvalues", p.eigenvalues},
          {"grad_norm", p.grad_norm}};
}

Json surface_json(const LevelSurface& s) {
  Json comps = Json::array();
  for (const auto& c : s.topology.per_component) {
    comps.push_back({{"vertices", c.vertices},
                     {"edges", c.edges},
                     {"faces", c.faces},
                     {"euler_characteristic", c.euler_char},
                     {"genus", c.genus},
                     {"flux", c.flux}});
  }
  Json j = {{"level", s.level},
            {"grid_cells", s.cells},
            {"components", s.topology.components},
            {"total_genus", s.topology.total_genus},
            {"per_component", comps}};
  if (s.check_cells[0] > 0) j["check_grid_cells"] = s.check_cells;
  return j;
}

Json knot_json(const CriticalStage& st) {
  const Box& bb = st.field.knot_bbox();
  return {{"curve", st.field.curve().to_string()},
          {"length", st.field.knot_length()},
          {"min_distance", st.field.min_distance()},
          {"bbox", {{"lo", vec(bb.lo)}, {"hi", vec(bb.hi)}}}};
}

Json clusters_json(const CriticalStage& st) {
  Json out = Json::array();
  std::size_t next = 0;
  for (const auto& c : st.clusters) {
    Json members = Json::array();
    for (std::size_t k = 0; k < c.points.size(); ++k) members.push_back(next++);
    out.push_back({{"value", c.value}, {"m", c.m}, {"n", c.n}, {"members", members}});
  }
  return out;
}

std::string mesh_name(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02zu.obj", stem, i);
  return buf;
}

void write_mesh(const RunConfig& config, const TriMesh& mesh, const std::string& name, Json& j) {
  const std::filesystem::path dir = config.output.dir / config.output.mesh_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  export_obj(mesh, dir / name);
  j["mesh"] = (std::filesystem::path(config.output.mesh_dir) / name).generic_string();
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    os << text;
    if (!os) throw Error(ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

CriticalStage run_critical_stage(const RunConfig& config) {
  const auto t0 = Clock::now();
  SearchConfig search = config.search;
  search.threads = config.threads;
  CriticalStage st{FieldEvaluator(make_curve(config.knot), config.quadrature), {}, 0.0, {}, 0.0};
  st.points = find_critical_points(st.field, search);
  st.cluster_tol = config.cluster_tol > 0.0 ? config.cluster_tol : default_cluster_tol(st.points);
  st.clusters = cluster_by_value(st.points, st.cluster_tol);
  st.seconds = since(t0);
  return st;
}

AnalyzeResult analyze(const RunConfig& config) {
  const auto t0 = Clock::now();
  const CriticalStage st = run_critical_stage(config);
  const std::vector<double> levels = choose_regular_values(st.clusters, st.cluster_tol, config.epsilon);

  const auto t1 = Clock::now();
  std::vector<LevelSurface> surfaces;
  MorseCode code;
  code.distinct = is_distinct(st.clusters);
  code.regular_values = levels;
  Json surfaces_json = Json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    LevelSurface s = extract_level(st.field, levels[i], st.points, config.surface, config.threads,
                                   config.output.write_meshes);
    Json sj = surface_json(s);
    if (config.output.write_meshes) write_mesh(config, s.mesh, mesh_name("surface", i), sj);
    s.mesh = TriMesh{};
    code.genera.push_back(s.topology.total_genus);
    surfaces.push_back(std::move(s));
    surfaces_json.push_back(std::move(sj));
  }
  const double surface_seconds = since(t1);
  const VerificationReport ver = verify(code, st.clusters, surfaces);

  AnalyzeResult out;
  out.all_passed = ver.all_passed();
  Json& r = out.report;
  r["schema_version"] = kReportSchemaVersion;
  r["tool"] = {{"name", "knotmorse"}, {"version", KNOTMORSE_VERSION}};
  r["command"] = "analyze";
  r["config"] = config_json(config);
  r["knot"] = knot_json(st);
  Json pts = Json::array();
  for (const auto& p : st.points) pts.push_back(point_json(p));
  r["critical_points"] = pts;
  r["cluster_tol"] = st.cluster_tol;
  r["clusters"] = clusters_json(st);
  r["regular_values"] = levels;
  r["surfaces"] = surfaces_json;
  r["morse_code"] = {{"genera", code.genera}, {"distinct", code.distinct}};
  Json checks = Json::array();
  for (const auto& c : ver.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"applicable", c.applicable},
                      {"details", c.details}});
  }
  r["verification"] = {{"all_passed", out.all_passed}, {"checks", checks}};
  r["timings"] = {{"critical_seconds", st.seconds},
                  {"surfaces_seconds", surface_seconds},
                  {"total_seconds", since(t0)}};

  out.report_path = config.output.dir / config.output.report;
  write_file_atomic(out.report_path, r.dump(2) + "\n");
  return out;
}

TableResult critical(const RunConfig& config) {
  const CriticalStage st = run_critical_stage(config);
  TableResult out;
  out.json["schema_version"] = kReportSchemaVersion;
  out.json["command"] = "critical";
  out.json["knot"] = knot_json(st);
  Json pts = Json::array();
  for (const auto& p : st.points) pts.push_back(point_json(p));
  out.json["critical_points"] = pts;
  out.json["cluster_tol"] = st.cluster_tol;
  out.json["clusters"] = clusters_json(st);

  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%4s %16s %16s %16s %18s %6s %8s\n", "#", "x", "y", "z", "value",
                "index", "cluster");
  os << buf;
  std::size_t row = 0;
  for (std::size_t c = 0; c < st.clusters.size(); ++c) {
    for (const auto& p : st.clusters[c].points) {
      std::snprintf(buf, sizeof buf, "%4zu %16.10f %16.10f %16.10f %18.12f %6d %8zu\n", row++,
                    p.position.x(), p.position.y(), p.position.z(), p.value, p.index, c);
      os << buf;
    }
  }
  std::snprintf(buf, sizeof buf, "%zu critical point(s) in %zu cluster(s); knot length %.12g\n",
                st.points.size(), st.clusters.size(), st.field.knot_length());
  os << buf;
  out.text = os.str();
  return out;
}

TableResult surfaces(const RunConfig& config, const std::vector<double>& levels) {
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "no levels given");
  const CriticalStage st = run_critical_stage(config);
  for (double level : levels) {
    if (!(level > 0.0) || !std::isfinite(level))
      throw Error(ErrorCode::InvalidArgument, "levels must be positive and finite");
    for (const auto& p : st.points) {
      if (std::abs(level - p.value) < 1e-3 * p.value) {
        std::ostringstream os;
        os.precision(12);
        os << "level " << level << " is too close to the critical value " << p.value
           << " (index " << p.index << "); choose a regular value";
        throw Error(ErrorCode::LevelNotRegular, os.str());
      }
    }
  }

  TableResult out;
  out.json["schema_version"] = kReportSchemaVersion;
  out.json["command"] = "surfaces";
  out.json["knot"] = knot_json(st);
  Json list = Json::array();
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%14s %10s %6s %10s %16s  %s\n", "level", "components", "genus",
                "grid", "min flux", "mesh");
  os << buf;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    LevelSurface s = extract_level(st.field, levels[i], st.points, config.surface, config.threads,
                                   config.output.write_meshes);
    Json sj = surface_json(s);
    if (config.output.write_meshes) write_mesh(config, s.mesh, mesh_name("level", i), sj);
    double min_flux = INFINITY;
    for (const auto& c : s.topology.per_component) min_flux = std::min(min_flux, c.flux);
    std::snprintf(buf, sizeof buf, "%14.8g %10d %6d %10d %16.8g  %s\n", s.level,
                  s.topology.components, s.topology.total_genus, s.cells[0], min_flux,
                  sj.contains("mesh") ? sj["mesh"].get<std::string>().c_str() : "-");
    os << buf;
    list.push_back(std::move(sj));
  }
  out.json["surfaces"] = list;
  out.text = os.str();
  return out;
}

RunConfig perturbed_config(const RunConfig& config, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw Error(ErrorCode::InvalidArgument, "amplitude must be finite and non-negative");
  RunConfig out = config;
  out.knot = KnotSpec{};
  out.knot.expression = perturb(make_curve(config.knot), amplitude, seed).to_string();
  // Keep the perturbed run from overwriting the original run's outputs.
  out.output.report = std::filesystem::path(config.output.report).stem().string() + "_perturbed.json";
  out.output.mesh_dir = config.output.mesh_dir + "_perturbed";
  return out;
}

Json without_timings(Json report) {
  report.erase("timings");
  return report;
}

}  // namespace knotmorse
