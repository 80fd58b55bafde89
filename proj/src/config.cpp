#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "error.hpp"

namespace knotmorse {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::source_region& where, const std::string& message) const {
    std::ostringstream os;
    os << source_ << ":" << where.begin.line << ":" << where.begin.column << ": " << message;
    throw Error(ErrorCode::Config, os.str());
  }

  void only_keys(const toml::table& t, const std::string& section,
                 std::initializer_list<const char*> allowed) const {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, node] : t) {
      if (!ok.count(std::string(key.str()))) {
        fail(node.source(), "unknown key '" + std::string(key.str()) + "'" +
                                (section.empty() ? "" : " in [" + section + "]"));
      }
    }
  }

  const toml::table* section(const toml::table& root, const char* name) const {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) fail(n->source(), std::string("'") + name + "' must be a table");
    return n->as_table();
  }

  void get(const toml::table& t, const char* key, int& out, int min) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value_exact<std::int64_t>();
    if (!v) fail(n->source(), std::string("'") + key + "' must be an integer");
    if (*v < min || *v > 1'000'000'000)
      fail(n->source(), std::string("'") + key + "' must be at least " + std::to_string(min));
    out = static_cast<int>(*v);
  }

  void get(const toml::table& t, const char* key, std::uint64_t& out) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value_exact<std::int64_t>();
    if (!v || *v < 0) fail(n->source(), std::string("'") + key + "' must be a non-negative integer");
    out = static_cast<std::uint64_t>(*v);
  }

  // Strictly positive unless `allow_inf` admits +inf as "unbounded".
  void get_positive(const toml::table& t, const char* key, double& out,
                    bool allow_inf = false) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value<double>();  // integers are accepted too
    if (!v || !(n->is_floating_point() || n->is_integer()))
      fail(n->source(), std::string("'") + key + "' must be a number");
    if (!(*v > 0.0) || (!allow_inf && !std::isfinite(*v)))
      fail(n->source(), std::string("'") + key + "' must be positive");
    out = *v;
  }

  void get(const toml::table& t, const char* key, bool& out) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value_exact<bool>();
    if (!v) fail(n->source(), std::string("'") + key + "' must be a boolean");
    out = *v;
  }

  void get(const toml::table& t, const char* key, std::string& out) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value_exact<std::string>();
    if (!v) fail(n->source(), std::string("'") + key + "' must be a string");
    out = *v;
  }

 private:
  std::string source_;
};

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source_name << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw Error(ErrorCode::Config, os.str());
  }
  const Reader r(source_name);
  RunConfig c;
  r.only_keys(root, "", {"threads", "knot", "quadrature", "search", "surface", "morse", "output"});
  int threads = 0;
  r.get(root, "threads", threads, 0);
  c.threads = static_cast<unsigned>(threads);

  const toml::table* knot = r.section(root, "knot");
  if (!knot) throw Error(ErrorCode::Config, source_name + ": missing [knot] section");
  r.only_keys(*knot, "knot", {"builtin", "params", "expression"});
  r.get(*knot, "builtin", c.knot.builtin);
  r.get(*knot, "expression", c.knot.expression);
  if (const toml::node* p = knot->get("params")) {
    const toml::array* arr = p->as_array();
    if (!arr) r.fail(p->source(), "'params' must be an array of numbers");
    for (const auto& item : *arr) {
      const auto v = item.value<double>();
      if (!v || !(item.is_floating_point() || item.is_integer()))
        r.fail(item.source(), "'params' must be an array of numbers");
      c.knot.params.push_back(*v);
    }
  }
  if (c.knot.builtin.empty() == c.knot.expression.empty())
    r.fail(knot->source(), "[knot] needs exactly one of 'builtin' and 'expression'");
  if (!c.knot.expression.empty() && knot->get("params"))
    r.fail(knot->get("params")->source(), "'params' only applies to 'builtin'");

  if (const toml::table* q = r.section(root, "quadrature")) {
    r.only_keys(*q, "quadrature", {"panels", "nodes_per_panel", "refine_depth", "min_distance"});
    r.get(*q, "panels", c.quadrature.panels, 1);
    r.get(*q, "nodes_per_panel", c.quadrature.nodes_per_panel, 1);
    r.get(*q, "refine_depth", c.quadrature.refine_depth, 0);
    if (c.quadrature.refine_depth > 20) r.fail(q->get("refine_depth")->source(), "'refine_depth' must be at most 20");
    r.get_positive(*q, "min_distance", c.quadrature.min_distance);
  }

  if (const toml::table* s = r.section(root, "search")) {
    r.only_keys(*s, "search",
                {"grid_resolution", "random_seeds", "rng_seed", "newton_tol", "max_iter",
                 "dedup_tol", "degenerate_tol", "probe_fraction"});
    r.get(*s, "grid_resolution", c.search.grid_resolution, 1);
    r.get(*s, "random_seeds", c.search.random_seeds, 0);
    r.get(*s, "rng_seed", c.search.rng_seed);
    r.get_positive(*s, "newton_tol", c.search.newton_tol);
    r.get(*s, "max_iter", c.search.max_iter, 1);
    r.get_positive(*s, "dedup_tol", c.search.dedup_tol);
    r.get_positive(*s, "degenerate_tol", c.search.degenerate_tol);
    r.get_positive(*s, "probe_fraction", c.search.probe_fraction);
  }

  if (const toml::table* s = r.section(root, "surface")) {
    r.only_keys(*s, "surface",
                {"resolution", "max_resolution", "cells_per_feature", "margin", "stability_check"});
    r.get(*s, "resolution", c.surface.base_resolution, kMinGridResolution);
    c.surface.max_resolution = std::max(c.surface.max_resolution, c.surface.base_resolution);
    r.get(*s, "max_resolution", c.surface.max_resolution, c.surface.base_resolution);
    r.get_positive(*s, "cells_per_feature", c.surface.cells_per_feature);
    r.get_positive(*s, "margin", c.surface.margin);
    r.get(*s, "stability_check", c.surface.stability_check);
  }

  if (const toml::table* m = r.section(root, "morse")) {
    r.only_keys(*m, "morse", {"cluster_tol", "gap_fraction", "epsilon_cap"});
    r.get_positive(*m, "cluster_tol", c.cluster_tol);
    r.get_positive(*m, "gap_fraction", c.epsilon.gap_fraction);
    if (c.epsilon.gap_fraction >= 1.0) r.fail(m->get("gap_fraction")->source(), "'gap_fraction' must be below 1");
    r.get_positive(*m, "epsilon_cap", c.epsilon.cap, true);
  }

  if (const toml::table* o = r.section(root, "output")) {
    r.only_keys(*o, "output", {"dir", "report", "mesh_dir", "write_meshes"});
    std::string dir = c.output.dir.string();
    r.get(*o, "dir", dir);
    c.output.dir = dir;
    r.get(*o, "report", c.output.report);
    r.get(*o, "mesh_dir", c.output.mesh_dir);
    r.get(*o, "write_meshes", c.output.write_meshes);
    if (c.output.report.empty()) r.fail(o->get("report")->source(), "'report' must not be empty");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Config, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string to_toml(const RunConfig& c) {
  std::ostringstream os;
  os << "threads = " << c.threads << "\n\n[knot]\n";
  if (!c.knot.builtin.empty()) {
    os << "builtin = " << quoted(c.knot.builtin) << "\nparams = [";
    for (std::size_t i = 0; i < c.knot.params.size(); ++i)
      os << (i ? ", " : "") << number(c.knot.params[i]);
    os << "]\n";
  } else {
    os << "expression = " << quoted(c.knot.expression) << "\n";
  }
  os << "\n[quadrature]\npanels = " << c.quadrature.panels
     << "\nnodes_per_panel = " << c.quadrature.nodes_per_panel
     << "\nrefine_depth = " << c.quadrature.refine_depth << "\n";
  if (c.quadrature.min_distance > 0.0) os << "min_distance = " << number(c.quadrature.min_distance) << "\n";
  os << "\n[search]\ngrid_resolution = " << c.search.grid_resolution
     << "\nrandom_seeds = " << c.search.random_seeds << "\nrng_seed = " << c.search.rng_seed
     << "\nnewton_tol = " << number(c.search.newton_tol) << "\nmax_iter = " << c.search.max_iter
     << "\ndegenerate_tol = " << number(c.search.degenerate_tol)
     << "\nprobe_fraction = " << number(c.search.probe_fraction) << "\n";
  if (c.search.dedup_tol > 0.0) os << "dedup_tol = " << number(c.search.dedup_tol) << "\n";
  os << "\n[surface]\nresolution = " << c.surface.base_resolution
     << "\nmax_resolution = " << c.surface.max_resolution
     << "\ncells_per_feature = " << number(c.surface.cells_per_feature)
     << "\nmargin = " << number(c.surface.margin)
     << "\nstability_check = " << (c.surface.stability_check ? "true" : "false") << "\n";
  os << "\n[morse]\ngap_fraction = " << number(c.epsilon.gap_fraction)
     << "\nepsilon_cap = " << number(c.epsilon.cap) << "\n";
  if (c.cluster_tol > 0.0) os << "cluster_tol = " << number(c.cluster_tol) << "\n";
  os << "\n[output]\ndir = " << quoted(c.output.dir.string())
     << "\nreport = " << quoted(c.output.report) << "\nmesh_dir = " << quoted(c.output.mesh_dir)
     << "\nwrite_meshes = " << (c.output.write_meshes ? "true" : "false") << "\n";
  return os.str();
}

KnotCurve make_curve(const KnotSpec& knot) {
  if (!knot.expression.empty()) return parse_curve(knot.expression);
  return builtin_curve(knot.builtin, knot.params);
}

}  // namespace knotmorse
