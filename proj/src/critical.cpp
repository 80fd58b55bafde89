#include "critical.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"

namespace knotmorse {

namespace {

constexpr int kMaxHalvings = 30;
constexpr double kSingularRatio = 1e-12;

std::optional<double> grad_norm_at(const FieldEvaluator& field, const Vec3& x) {
  try {
    return field.gradient(x).norm();
  } catch (const TooCloseError&) {
    return std::nullopt;
  }
}

// Backtracks along `dir` from x; returns the first trial point with smaller
// |grad phi|, or nullopt.
std::optional<Vec3> backtrack(const FieldEvaluator& field, const Vec3& x, const Vec3& dir,
                              double current) {
  double alpha = 1.0;
  for (int k = 0; k < kMaxHalvings; ++k, alpha *= 0.5) {
    const Vec3 trial = x + alpha * dir;
    const auto g = grad_norm_at(field, trial);
    if (g && *g < current) return trial;
  }
  return std::nullopt;
}

std::string describe(const Vec3& p) {
  std::ostringstream os;
  os.precision(10);
  os << "(" << p.x() << ", " << p.y() << ", " << p.z() << ")";
  return os.str();
}

}  // namespace

Box search_box(const FieldEvaluator& field, const SearchConfig& config) {
  const Box& bb = field.knot_bbox();
  const double probe_level = field.knot_length() / (config.probe_fraction * bb.diagonal());
  return bb.inflated(field.enclosing_radius(probe_level));
}

Vec3 newton_step(const FieldEvaluator& field, const Vec3& x) {
  const FieldSample s = field.evaluate(x);
  const double gnorm = s.gradient.norm();
  if (gnorm == 0.0) return x;

  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(s.hessian);
  const Vec3 lambda = eig.eigenvalues();
  const double largest = lambda.cwiseAbs().maxCoeff();
  const double smallest = lambda.cwiseAbs().minCoeff();

  if (largest > 0.0 && smallest > kSingularRatio * largest) {
    const Vec3 dir = -(eig.eigenvectors() *
                       (eig.eigenvectors().transpose() * s.gradient).cwiseQuotient(lambda));
    if (auto next = backtrack(field, x, dir, gnorm)) return *next;
  }
  // Steepest descent on |grad phi|^2 / 2, whose gradient is H grad phi,
  // scaled to a Newton-like length.
  Vec3 dir = -(s.hessian * s.gradient);
  const double dn = dir.norm();
  if (dn == 0.0) return x;
  dir *= gnorm / (largest > 0.0 ? largest : 1.0) / dn;
  if (auto next = backtrack(field, x, dir, gnorm)) return *next;
  return x;
}

NewtonTrace newton_solve(const FieldEvaluator& field, const Vec3& x0, double tol, int max_iter,
                         const Box& box) {
  NewtonTrace trace{x0, INFINITY, 0, false};
  Vec3 x = x0;
  for (int it = 0; it <= max_iter; ++it) {
    const double g = field.gradient(x).norm();
    trace.position = x;
    trace.grad_norm = g;
    trace.iterations = it;
    if (g <= tol) {
      trace.converged = true;
      return trace;
    }
    if (it == max_iter) break;
    const Vec3 next = newton_step(field, x);
    if (next == x || !box.contains(next)) break;
    x = next;
  }
  return trace;
}

CriticalPoint classify(const FieldEvaluator& field, const Vec3& x, double degenerate_tol) {
  const FieldSample s = field.evaluate(x);
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(s.hessian, Eigen::EigenvaluesOnly);
  const Vec3 lambda = eig.eigenvalues();
  CriticalPoint cp;
  cp.position = x;
  cp.value = s.potential;
  cp.grad_norm = s.gradient.norm();
  cp.eigenvalues = {lambda[0], lambda[1], lambda[2]};
  const double scale = s.hessian.norm();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(lambda[i]) <= degenerate_tol * scale) {
      std::ostringstream os;
      os.precision(6);
      os << "degenerate critical point at " << describe(x) << ": Hessian eigenvalue "
         << lambda[i] << " is below " << degenerate_tol << " * ||H|| = "
         << degenerate_tol * scale << "; perturb the knot to obtain a Morse function";
      throw Error(ErrorCode::DegenerateCriticalPoint, os.str());
    }
    if (lambda[i] < 0.0) ++cp.index;
  }
  if (cp.index < 1 || cp.index > 2) {
    throw Error(ErrorCode::Topology, "critical point at " + describe(x) + " has index " +
                                         std::to_string(cp.index) +
                                         "; a harmonic potential admits only indices 1 and 2");
  }
  return cp;
}

std::vector<CriticalPoint> find_critical_points(const FieldEvaluator& field,
                                                const SearchConfig& config) {
  if (config.grid_resolution < 1 || config.random_seeds < 0 || !(config.newton_tol > 0.0) ||
      config.max_iter < 1 || !(config.degenerate_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "invalid search configuration");

  const Box box = search_box(field, config);
  const double dedup_tol =
      config.dedup_tol > 0.0 ? config.dedup_tol : 1e-6 * field.knot_bbox().diagonal();

  std::vector<Vec3> seeds;
  const int g = config.grid_resolution;
  const Vec3 ext = box.extent();
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      for (int k = 0; k < g; ++k) {
        const Vec3 frac((i + 0.5) / g, (j + 0.5) / g, (k + 0.5) / g);
        seeds.push_back(box.lo + ext.cwiseProduct(frac));
      }
  std::mt19937_64 rng(config.rng_seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int s = 0; s < config.random_seeds; ++s) {
    const double a = unit(), b = unit(), c = unit();
    seeds.push_back(box.lo + ext.cwiseProduct(Vec3(a, b, c)));
  }

  std::vector<std::optional<Vec3>> found(seeds.size());
  parallel_for(seeds.size(), config.threads, [&](std::size_t i) {
    if (!field.try_potential(seeds[i])) return;  // inside the exclusion radius
    try {
      const NewtonTrace tr = newton_solve(field, seeds[i], config.newton_tol, config.max_iter, box);
      if (tr.converged) found[i] = tr.position;
    } catch (const TooCloseError&) {
      // Trajectory ran into the knot; abandoned.
    }
  });

  std::vector<Vec3> unique;
  for (const auto& p : found) {
    if (!p) continue;
    const bool dup = std::any_of(unique.begin(), unique.end(),
                                 [&](const Vec3& q) { return (q - *p).norm() <= dedup_tol; });
    if (!dup) unique.push_back(*p);
  }
  if (unique.empty()) {
    throw Error(ErrorCode::NoCriticalPoints,
                "no critical points found; the seed grid or search box is misconfigured");
  }

  std::vector<CriticalPoint> points;
  points.reserve(unique.size());
  for (const Vec3& p : unique) points.push_back(classify(field, p, config.degenerate_tol));
  std::stable_sort(points.begin(), points.end(),
                   [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });
  return points;
}

double default_cluster_tol(const std::vector<CriticalPoint>& points) {
  if (points.empty()) return 0.0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& p : points) {
    lo = std::min(lo, p.value);
    hi = std::max(hi, p.value);
  }
  return std::max(1e-5 * (hi - lo), 1e-12 * std::abs(hi));
}

std::vector<CriticalCluster> cluster_by_value(const std::vector<CriticalPoint>& points,
                                              double cluster_tol) {
  std::vector<CriticalCluster> clusters;
  for (const auto& p : points) {
    if (clusters.empty() || std::abs(p.value - clusters.back().value) > cluster_tol) {
      clusters.emplace_back();
    }
    CriticalCluster& c = clusters.back();
    c.points.push_back(p);
    c.value += (p.value - c.value) / static_cast<double>(c.points.size());
    if (p.index == 1) ++c.m;
    if (p.index == 2) ++c.n;
  }
  return clusters;
}

bool is_distinct(const std::vector<CriticalCluster>& clusters) {
  return std::all_of(clusters.begin(), clusters.end(),
                     [](const CriticalCluster& c) { return c.points.size() == 1; });
}

}  // namespace knotmorse
