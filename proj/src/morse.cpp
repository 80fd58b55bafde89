#include "morse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace knotmorse {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string join(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

std::vector<int> sorted_genera(const TopologyReport& r) {
  std::vector<int> g;
  for (const auto& c : r.per_component) g.push_back(c.genus);
  std::sort(g.begin(), g.end());
  return g;
}

}  // namespace

std::vector<double> choose_regular_values(const std::vector<CriticalCluster>& clusters,
                                          double cluster_tol, const EpsilonPolicy& policy) {
  if (clusters.empty()) throw Error(ErrorCode::InvalidArgument, "no critical clusters");
  if (!(policy.gap_fraction > 0.0 && policy.gap_fraction < 1.0) || !(policy.cap > 0.0))
    throw Error(ErrorCode::InvalidArgument, "gap_fraction must be in (0, 1) and cap positive");
  const std::size_t n = clusters.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = clusters[i + 1].value - clusters[i].value;
    if (gap < 10.0 * cluster_tol) {
      throw Error(ErrorCode::ClustersTooClose,
                  "critical values " + fmt(clusters[i].value) + " and " +
                      fmt(clusters[i + 1].value) + " are separated by " + fmt(gap) +
                      ", less than 10 * cluster_tol; perturb the knot or tighten the tolerances");
    }
  }

  std::vector<double> values{0.5 * clusters.front().value};
  std::vector<double> local_gap{clusters.front().value};
  for (std::size_t i = 0; i < n; ++i) {
    const double v = clusters[i].value;
    double gap;
    if (i + 1 < n) gap = clusters[i + 1].value - v;
    else if (n > 1) gap = v - clusters[i - 1].value;
    else gap = 0.25 * v;  // 1.1 * V after the gap fraction below
    const double eps = n == 1 && i == 0 ? std::min(0.1 * v, policy.cap)
                                        : std::min(policy.gap_fraction * gap, policy.cap);
    values.push_back(v + eps);
    local_gap.push_back(gap);
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (const auto& c : clusters) {
      if (std::abs(values[k] - c.value) < 0.1 * local_gap[k]) {
        throw Error(ErrorCode::InvalidArgument,
                    "regular value " + fmt(values[k]) + " lies within a tenth of the local gap of "
                    "critical value " + fmt(c.value) + "; raise the epsilon cap");
      }
    }
  }
  return values;
}

double estimate_tube_radius(const FieldEvaluator& field, double level, int samples,
                            int directions) {
  const KnotCurve& curve = field.curve();
  const double start = 2.0 * field.min_distance();
  const double far = field.enclosing_radius(level) + field.knot_bbox().diagonal();
  auto phi = [&](const Vec3& p) {
    const auto v = field.try_potential(p);
    return v ? *v : INFINITY;
  };
  double best = INFINITY;
  for (int s = 0; s < samples; ++s) {
    const double t = kTwoPi * s / samples;
    const Vec3 p = curve.point(t);
    const Vec3 tangent = curve.velocity(t).normalized();
    const Vec3 helper = std::abs(tangent.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 n1 = tangent.cross(helper).normalized();
    const Vec3 n2 = tangent.cross(n1);
    for (int d = 0; d < directions; ++d) {
      const double theta = kTwoPi * d / directions;
      const Vec3 u = std::cos(theta) * n1 + std::sin(theta) * n2;
      double lo = start, hi = start;
      if (phi(p + lo * u) < level) return start;
      while (phi(p + hi * u) >= level && hi < far) {
        lo = hi;
        hi *= 1.5;
      }
      if (lo >= best) continue;
      while (hi - lo > 1e-4 * lo) {
        const double mid = 0.5 * (lo + hi);
        (phi(p + mid * u) >= level ? lo : hi) = mid;
      }
      best = std::min(best, lo);
    }
  }
  return best;
}

double feature_size(const FieldEvaluator& field, double level,
                    const std::vector<CriticalPoint>& points) {
  double size = estimate_tube_radius(field, level);
  for (const auto& p : points) {
    double lam = 0.0;
    for (double l : p.eigenvalues) lam = std::max(lam, std::abs(l));
    if (lam > 0.0) size = std::min(size, std::sqrt(2.0 * std::abs(level - p.value) / lam));
  }
  return size;
}

GridSpec grid_for_policy(const FieldEvaluator& field, double level,
                         const std::vector<CriticalPoint>& points, const GridPolicy& policy) {
  if (policy.base_resolution < kMinGridResolution ||
      policy.max_resolution < policy.base_resolution || !(policy.cells_per_feature > 0.0))
    throw Error(ErrorCode::InvalidArgument, "invalid grid policy");
  const GridSpec base = grid_for_level(field, level, policy.base_resolution, policy.margin);
  const double extent = base.box.extent().maxCoeff();
  const double target = feature_size(field, level, points) / policy.cells_per_feature;
  const double wanted = target > 0.0 ? std::ceil(extent / target) : INFINITY;
  const int res = static_cast<int>(std::clamp(wanted, static_cast<double>(policy.base_resolution),
                                              static_cast<double>(policy.max_resolution)));
  return res == policy.base_resolution ? base
                                       : grid_for_level(field, level, res, policy.margin);
}

LevelSurface extract_level(const FieldEvaluator& field, double level,
                           const std::vector<CriticalPoint>& points, const GridPolicy& policy,
                           unsigned threads, bool keep_mesh) {
  const PotentialField pf(field);
  const GridSpec grid = grid_for_policy(field, level, points, policy);
  ExtractOptions opt;
  opt.threads = threads;

  LevelSurface out;
  out.level = level;
  out.cells = grid.cells;
  TriMesh mesh = extract_isosurface(pf, level, grid, opt);
  if (mesh.empty()) {
    throw Error(ErrorCode::Topology, "level set " + fmt(level) + " is empty on a " +
                                         std::to_string(grid.cells[0]) + "-cell grid");
  }
  out.topology = topology(mesh);
  attach_flux(out.topology, flux(pf, mesh));

  if (policy.stability_check) {
    const GridSpec fine = make_grid(grid.box, 2 * grid.cells[0]);
    out.check_cells = fine.cells;
    const TopologyReport check = topology(extract_isosurface(pf, level, fine, opt));
    if (check.components != out.topology.components ||
        sorted_genera(check) != sorted_genera(out.topology)) {
      std::ostringstream os;
      os << "topology of level set " << fmt(level) << " changes under grid doubling: "
         << out.topology.components << " component(s) with genera "
         << join(sorted_genera(out.topology)) << " at " << grid.cells[0] << " cells, "
         << check.components << " with genera " << join(sorted_genera(check)) << " at "
         << fine.cells[0] << "; raise surface.cells_per_feature or choose another level";
      throw Error(ErrorCode::UnstableGenus, os.str());
    }
  }
  if (keep_mesh) out.mesh = std::move(mesh);
  return out;
}

MorseAnalysis assemble_morse_code(const FieldEvaluator& field,
                                  const std::vector<CriticalCluster>& clusters,
                                  const std::vector<double>& regular_values,
                                  const GridPolicy& policy, unsigned threads,
                                  bool keep_meshes) {
  if (regular_values.size() != clusters.size() + 1)
    throw Error(ErrorCode::InvalidArgument, "need one regular value below and one above each cluster");
  std::vector<CriticalPoint> points;
  for (const auto& c : clusters) points.insert(points.end(), c.points.begin(), c.points.end());

  MorseAnalysis out;
  out.code.distinct = is_distinct(clusters);
  out.code.regular_values = regular_values;
  for (double level : regular_values) {
    out.surfaces.push_back(extract_level(field, level, points, policy, threads, keep_meshes));
    out.code.genera.push_back(out.surfaces.back().topology.total_genus);
  }
  return out;
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check& VerificationReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw Error(ErrorCode::InvalidArgument, "no check named " + name);
}

VerificationReport verify(const MorseCode& code, const std::vector<CriticalCluster>& clusters,
                          const std::vector<LevelSurface>& surfaces) {
  VerificationReport report;
  const std::vector<int>& g = code.genera;
  const bool shaped = !g.empty() && g.size() == clusters.size() + 1;
  auto add = [&](std::string name, bool applicable, bool passed, std::string details) {
    report.checks.push_back({std::move(name), !applicable || passed, applicable, std::move(details)});
  };
  auto shape_note = [&] {
    return "code " + join(g) + " has " + std::to_string(g.size()) + " entries for " +
           std::to_string(clusters.size()) + " clusters";
  };

  add("code_endpoints", true, shaped && g.front() == 0 && g.back() == 1,
      shaped ? "G_0 = " + std::to_string(g.front()) + ", last = " + std::to_string(g.back())
             : shape_note());

  int m1 = 0, m2 = 0, finite = 0;
  for (const auto& c : clusters) {
    m1 += c.m;
    m2 += c.n;
    finite += static_cast<int>(c.points.size());
  }
  const int N = finite + 1;  // the point at infinity has index 3
  add("index_balance", true, m1 - m2 == 1 && m1 + m2 + 1 == N,
      "m1 = " + std::to_string(m1) + ", m2 = " + std::to_string(m2) + ", N = " +
          std::to_string(N) + " (" + std::to_string(finite) + " finite + infinity)");

  if (!code.distinct) {
    add("unit_steps", false, true, "critical values are not distinct");
    add("first_step_one", false, true, "critical values are not distinct");
  } else if (!shaped) {
    add("unit_steps", true, false, shape_note());
    add("first_step_one", true, false, shape_note());
  } else {
    std::string bad;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const int step = g[i + 1] - g[i];
      const int index = clusters[i].points.front().index;
      const int expected = index == 1 ? 1 : -1;
      if (step != expected && bad.empty()) {
        bad = "step " + std::to_string(i + 1) + " is " + std::to_string(step) +
              " but the critical point has index " + std::to_string(index);
      }
    }
    add("unit_steps", true, bad.empty(), bad.empty() ? "every step matches its index" : bad);
    add("first_step_one", true, g.size() > 1 && g[1] == 1,
        g.size() > 1 ? "G_1 = " + std::to_string(g[1]) : shape_note());
  }

  if (!shaped) {
    add("index_steps", true, false, shape_note());
  } else {
    std::string bad;
    for (std::size_t i = 0; i < clusters.size() && bad.empty(); ++i) {
      const int step = g[i + 1] - g[i];
      const int mn = clusters[i].m - clusters[i].n;
      if (step != mn) {
        bad = "step " + std::to_string(i + 1) + " is " + std::to_string(step) + " but m - n = " +
              std::to_string(clusters[i].m) + " - " + std::to_string(clusters[i].n);
      }
    }
    if (bad.empty() && clusters.front().m <= clusters.front().n) {
      bad = "lowest cluster has m = " + std::to_string(clusters.front().m) +
            " <= n = " + std::to_string(clusters.front().n);
    }
    add("index_steps", true, bad.empty(), bad.empty() ? "every step equals m - n" : bad);
  }

  if (surfaces.empty()) {
    add("flux_positivity", false, true, "no surfaces extracted");
    add("connectedness", false, true, "no surfaces extracted");
  } else {
    std::string bad_flux, bad_conn;
    double min_flux = INFINITY;
    for (const auto& s : surfaces) {
      for (std::size_t c = 0; c < s.topology.per_component.size(); ++c) {
        const double f = s.topology.per_component[c].flux;
        min_flux = std::min(min_flux, f);
        if (!(f > 0.0) && bad_flux.empty())
          bad_flux = "component " + std::to_string(c) + " of level " + fmt(s.level) +
                     " has flux " + fmt(f);
      }
      if (s.topology.components != 1 && bad_conn.empty())
        bad_conn = "level " + fmt(s.level) + " has " + std::to_string(s.topology.components) +
                   " components";
    }
    add("flux_positivity", true, bad_flux.empty(),
        bad_flux.empty() ? "minimum component flux " + fmt(min_flux) : bad_flux);
    add("connectedness", true, bad_conn.empty(),
        bad_conn.empty() ? "every surface is connected" : bad_conn);
  }

  static const char* const order[] = {"code_endpoints",     "index_balance",          "unit_steps",
                                      "index_steps", "first_step_one", "flux_positivity",
                                      "connectedness"};
  std::vector<Check> sorted;
  for (const char* name : order) sorted.push_back(report.at(name));
  report.checks = std::move(sorted);
  return report;
}

}  // namespace knotmorse
