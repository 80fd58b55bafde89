// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "field.hpp"
#include "marching.hpp"
#include "mesh.hpp"
#include "pipeline.hpp"

using namespace knotmorse;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool passed = true;
  std::ostringstream why;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!passed) why << "; ";
      why << what;
      passed = false;
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  if (!o.passed) ++failures;
  std::printf("[%s] %d. %s", o.passed ? "PASS" : "FAIL", id, title.c_str());
  if (!o.passed) std::printf(" -- %s", o.why.str().c_str());
  std::printf("\n");
  std::fflush(stdout);
}

std::string join(const Json& arr) {
  std::string s = "(";
  for (std::size_t i = 0; i < arr.size(); ++i) s += (i ? "," : "") + arr[i].dump();
  return s + ")";
}

const std::filesystem::path kWork = std::filesystem::temp_directory_path() / "knotmorse_acceptance";

RunConfig config_for(const std::string& builtin, std::vector<double> params, const std::string& tag) {
  RunConfig c;
  c.knot.builtin = builtin;
  c.knot.params = std::move(params);
  c.output.dir = (kWork / tag).string();
  c.output.write_meshes = false;
  return c;
}

struct Run {
  Json report;
  bool ok = false;
  double seconds = 0.0;
  std::string error;
};

Run run_analyze(const RunConfig& c) {
  Run r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.report = analyze(c).report;
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

const Json& check_named(const Json& report, const std::string& name) {
  for (const auto& c : report["verification"]["checks"])
    if (c["name"] == name) return c;
  throw std::runtime_error("no check named " + name);
}

// Recomputes the index-count identity from the critical points alone, so the
// verifier in the library is not the only witness.
void index_balance_independent(Outcome& o, const std::string& label, const Run& r) {
  if (!r.ok) {
    o.require(false, label + " did not run: " + r.error);
    return;
  }
  int m1 = 0, m2 = 0, other = 0;
  for (const auto& p : r.report["critical_points"]) {
    const int idx = p["index"].get<int>();
    if (idx == 1) ++m1;
    else if (idx == 2) ++m2;
    else ++other;
  }
  const int n_total = static_cast<int>(r.report["critical_points"].size()) + 1;  // plus infinity
  std::ostringstream s;
  s << label << ": m1=" << m1 << " m2=" << m2 << " N=" << n_total;
  o.require(other == 0, s.str() + " with points of index 0 or 3");
  o.require(m1 - m2 == 1, s.str() + " violates m1 - m2 = 1");
  o.require(m1 + m2 + 1 == n_total, s.str() + " violates m1 + m2 + 1 = N");
  o.require(check_named(r.report, "index_balance")["passed"].get<bool>(), label + ": library index_balance check failed");
}

std::vector<Vec3> admissible_points(const FieldEvaluator& f, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Box box = f.knot_bbox().inflated(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> out;
  while (static_cast<int>(out.size()) < count) {
    const Vec3 p = box.lo + box.extent().cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
    if (f.distance_to_knot(p) >= f.min_distance()) out.push_back(p);
  }
  return out;
}

}  // namespace

int main() {
  std::filesystem::remove_all(kWork);

  const RunConfig trefoil_cfg = config_for("paper_trefoil", {}, "trefoil");
  const RunConfig circle_cfg = config_for("circle", {1.0}, "circle");
  const RunConfig torus_cfg = config_for("torus_knot", {2, 3, 2, 1}, "torus_knot");

  std::printf("running trefoil analysis...\n");
  std::fflush(stdout);
  const Run trefoil = run_analyze(trefoil_cfg);

  report(1, "trefoil Morse code (0,3,4,1), clusters 3/1/3 with indices 1/1/2, under 5 min",
         [&](Outcome& o) {
           o.require(trefoil.ok, "analyze failed: " + trefoil.error);
           if (!trefoil.ok) return;
           const Json& rep = trefoil.report;
           const Json& genera = rep["morse_code"]["genera"];
           o.require(genera == Json({0, 3, 4, 1}), "code " + join(genera));
           o.require(rep["critical_points"].size() == 7,
                     std::to_string(rep["critical_points"].size()) + " critical points");
           const Json& clusters = rep["clusters"];
           const std::vector<std::pair<int, int>> expected = {{3, 1}, {1, 1}, {3, 2}};
           o.require(clusters.size() == 3, std::to_string(clusters.size()) + " clusters");
           for (std::size_t i = 0; i < std::min<std::size_t>(3, clusters.size()); ++i) {
             const auto& members = clusters[i]["members"];
             o.require(static_cast<int>(members.size()) == expected[i].first,
                       "cluster " + std::to_string(i) + " has " + std::to_string(members.size()) + " members");
             for (const auto& idx : members) {
               const int index = rep["critical_points"][idx.get<std::size_t>()]["index"].get<int>();
               o.require(index == expected[i].second,
                         "cluster " + std::to_string(i) + " member of index " + std::to_string(index));
             }
           }
           o.require(trefoil.seconds < 300.0, "took " + std::to_string(trefoil.seconds) + " s");
           std::printf("    trefoil: %.1f s, code %s\n", trefoil.seconds, join(genera).c_str());
         });

  std::printf("running perturbed trefoil analysis...\n");
  std::fflush(stdout);
  Run perturbed;
  try {
    // Round-trip through the emitted TOML, as the CLI would.
    const RunConfig p = parse_config(to_toml(perturbed_config(trefoil_cfg, 0.05, 42)), "perturbed");
    perturbed = run_analyze(p);
  } catch (const std::exception& e) {
    perturbed.error = e.what();
  }

  report(2, "perturbed trefoil (amplitude 0.05) gives distinct code (0,1,2,3,4,3,2,1)", [&](Outcome& o) {
    o.require(perturbed.ok, "analyze failed: " + perturbed.error);
    if (!perturbed.ok) return;
    const Json& rep = perturbed.report;
    const Json& genera = rep["morse_code"]["genera"];
    o.require(genera == Json({0, 1, 2, 3, 4, 3, 2, 1}), "code " + join(genera));
    o.require(rep["clusters"].size() == 7, std::to_string(rep["clusters"].size()) + " clusters");
    o.require(rep["morse_code"]["distinct"].get<bool>(), "code not flagged distinct");
    // Each step goes up at an index-1 point and down at an index-2 point.
    const Json& clusters = rep["clusters"];
    for (std::size_t i = 0; i + 1 < genera.size() && i < clusters.size(); ++i) {
      const int step = genera[i + 1].get<int>() - genera[i].get<int>();
      const int index = rep["critical_points"][clusters[i]["members"][0].get<std::size_t>()]["index"].get<int>();
      o.require((index == 1 && step == 1) || (index == 2 && step == -1),
                "step " + std::to_string(i + 1) + " is " + std::to_string(step) + " at index " +
                    std::to_string(index));
    }
    o.require(check_named(rep, "unit_steps")["passed"].get<bool>(), "unit_steps check failed");
    std::printf("    perturbed: %.1f s, code %s\n", perturbed.seconds, join(genera).c_str());
  });

  const Run circle = run_analyze(circle_cfg);

  report(3, "circle: one critical point at the centre, value 2pi, eigenvalues (pi,pi,-2pi), code (0,1)",
         [&](Outcome& o) {
           o.require(circle.ok, "analyze failed: " + circle.error);
           if (!circle.ok) return;
           const Json& pts = circle.report["critical_points"];
           o.require(pts.size() == 1, std::to_string(pts.size()) + " critical points");
           if (pts.size() != 1) return;
           const Json& p = pts[0];
           const Vec3 x(p["position"][0].get<double>(), p["position"][1].get<double>(),
                        p["position"][2].get<double>());
           o.require(x.norm() < 1e-6, "position off centre by " + std::to_string(x.norm()));
           const double v = p["value"].get<double>();
           o.require(std::abs(v - 2 * kPi) <= 1e-8, "value " + std::to_string(v));
           const double ev[3] = {p["eigenvalues"][0].get<double>(), p["eigenvalues"][1].get<double>(),
                                 p["eigenvalues"][2].get<double>()};
           o.require(std::abs(ev[0] + 2 * kPi) <= 1e-5 && std::abs(ev[1] - kPi) <= 1e-5 &&
                         std::abs(ev[2] - kPi) <= 1e-5,
                     "eigenvalues " + p["eigenvalues"].dump());
           o.require(p["index"].get<int>() == 1, "index " + p["index"].dump());
           o.require(circle.report["morse_code"]["genera"] == Json({0, 1}),
                     "code " + join(circle.report["morse_code"]["genera"]));
         });

  const Run torus = run_analyze(torus_cfg);

  report(4, "index identity m1 - m2 = 1 and m1 + m2 + 1 = N on circle, trefoil, torus knot, perturbed trefoil",
         [&](Outcome& o) {
           index_balance_independent(o, "circle", circle);
           index_balance_independent(o, "trefoil", trefoil);
           index_balance_independent(o, "torus_knot(2,3)", torus);
           index_balance_independent(o, "perturbed trefoil", perturbed);
         });

  report(5, "harmonicity and finite-difference consistency at 1000 admissible points per knot",
         [&](Outcome& o) {
           struct Knot {
             const char* name;
             std::vector<double> params;
           };
           const Knot knots[] = {{"circle", {1.0}}, {"paper_trefoil", {}}, {"torus_knot", {2, 3, 2, 1}}};
           for (const auto& k : knots) {
             const FieldEvaluator f(builtin_curve(k.name, k.params));
             double worst_trace = 0, worst_grad = 0, worst_hess = 0;
             for (const Vec3& x : admissible_points(f, 1000, 2024)) {
               const FieldSample s = f.evaluate(x);
               const double hn = s.hessian.norm();
               worst_trace = std::max(worst_trace, std::abs(s.hessian.trace()) / (1.0 + hn));
               // Step proportional to the distance keeps truncation error
               // uniform near the knot.
               const double h = 1e-4 * std::min(1.0, f.distance_to_knot(x));
               Vec3 fd;
               Mat3 fdh;
               for (int a = 0; a < 3; ++a) {
                 Vec3 e = Vec3::Zero();
                 e[a] = h;
                 fd[a] = (f.potential(x + e) - f.potential(x - e)) / (2 * h);
                 fdh.col(a) = (f.gradient(x + e) - f.gradient(x - e)) / (2 * h);
               }
               worst_grad = std::max(worst_grad, (fd - s.gradient).norm() / std::max(1.0, s.gradient.norm()));
               worst_hess = std::max(worst_hess, (fdh - s.hessian).norm() / std::max(1.0, hn));
             }
             std::ostringstream s;
             s << k.name << ": trace " << worst_trace << ", grad " << worst_grad << ", hessian " << worst_hess;
             o.require(worst_trace <= 1e-8 && worst_grad <= 1e-5 && worst_hess <= 1e-5, s.str());
             std::printf("    %s\n", s.str().c_str());
           }
         });

  report(6, "every surface component has positive flux; circle enclosing flux within 2% of 8 pi^2",
         [&](Outcome& o) {
           const std::pair<const char*, const Run*> runs[] = {
               {"circle", &circle}, {"trefoil", &trefoil}, {"torus_knot", &torus}, {"perturbed", &perturbed}};
           for (const auto& [label, r] : runs) {
             if (!r->ok) {
               o.require(false, std::string(label) + " did not run");
               continue;
             }
             int count = 0;
             for (const auto& surf : r->report["surfaces"])
               for (const auto& c : surf["per_component"]) {
                 ++count;
                 o.require(c["flux"].get<double>() > 0.0,
                           std::string(label) + " level " + surf["level"].dump() + " flux " + c["flux"].dump());
               }
             o.require(count > 0, std::string(label) + " has no surface components");
           }
           if (!circle.ok) return;
           // The lowest regular value lies below the only critical value, so
           // its level set is a single sphere-like shell around the knot.
           const Json& shell = circle.report["surfaces"][0];
           o.require(shell["components"].get<int>() == 1 && shell["total_genus"].get<int>() == 0,
                     "lowest circle level set is not a single sphere");
           const double flux = shell["per_component"][0]["flux"].get<double>();
           const double target = 8 * kPi * kPi;
           o.require(std::abs(flux - target) <= 0.02 * target, "circle flux " + std::to_string(flux));
           std::printf("    circle enclosing flux %.4f (8 pi^2 = %.4f)\n", flux, target);
         });

  report(7, "analytic sphere and torus: genus 0 and 1 at 64^3, unchanged at 128^3", [&](Outcome& o) {
    const FunctionField sphere([](const Vec3& p) { return 1.0 / p.norm(); },
                               [](const Vec3& p) { return Vec3(-p / std::pow(p.norm(), 3)); });
    // Inverse squared distance to the circle of radius 2 in the xy-plane.
    const FunctionField torus(
        [](const Vec3& p) {
          const double q = std::hypot(p.x(), p.y()) - 2.0;
          return 1.0 / (q * q + p.z() * p.z() + 0.01);
        },
        [](const Vec3& p) {
          const double rho = std::hypot(p.x(), p.y());
          const double q = rho - 2.0;
          const double d = q * q + p.z() * p.z() + 0.01;
          const double s = -2.0 / (d * d);
          return Vec3(s * q * p.x() / rho, s * q * p.y() / rho, s * p.z());
        });
    for (int res : {64, 128}) {
      const TopologyReport ts =
          topology(extract_isosurface(sphere, 1.0, make_grid(Box{Vec3(-2, -2, -2), Vec3(2, 2, 2)}, res)));
      const TopologyReport tt = topology(
          extract_isosurface(torus, 4.0, make_grid(Box{Vec3(-3.5, -3.5, -1.5), Vec3(3.5, 3.5, 1.5)}, res)));
      const std::string r = std::to_string(res);
      o.require(ts.components == 1 && ts.total_genus == 0,
                "sphere at " + r + ": " + std::to_string(ts.components) + " components, genus " +
                    std::to_string(ts.total_genus));
      o.require(tt.components == 1 && tt.total_genus == 1,
                "torus at " + r + ": " + std::to_string(tt.components) + " components, genus " +
                    std::to_string(tt.total_genus));
    }
  });

  report(8, "every distinct-code run has second Morse-code entry 1", [&](Outcome& o) {
    const std::pair<const char*, const Run*> runs[] = {
        {"circle", &circle}, {"trefoil", &trefoil}, {"torus_knot", &torus}, {"perturbed", &perturbed}};
    int distinct_runs = 0;
    for (const auto& [label, r] : runs) {
      if (!r->ok || !r->report["morse_code"]["distinct"].get<bool>()) continue;
      ++distinct_runs;
      const Json& g = r->report["morse_code"]["genera"];
      o.require(g.size() >= 2 && g[1] == 1, std::string(label) + " code " + join(g));
      o.require(check_named(r->report, "first_step_one")["passed"].get<bool>(),
                std::string(label) + ": library first_step_one check failed");
    }
    // The circle and the perturbed trefoil are both expected to be distinct.
    o.require(distinct_runs >= 2, "only " + std::to_string(distinct_runs) + " distinct-code runs");
  });

  std::filesystem::remove_all(kWork);
  std::printf("failed criteria: %d of 8\n", failures);
  return failures == 0 ? 0 : 1;
}
