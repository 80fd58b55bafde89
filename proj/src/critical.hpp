#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "field.hpp"

namespace knotmorse {

struct SearchConfig {
  int grid_resolution = 13;        // seeds per axis of the regular grid
  int random_seeds = 500;
  std::uint64_t rng_seed = 1;
  double newton_tol = 1e-10;       // on |grad phi|
  int max_iter = 100;
  double dedup_tol = 0.0;          // <= 0: 1e-6 * knot bbox diagonal
  double degenerate_tol = 1e-6;    // relative to ||H||_F
  // The search box is the knot bbox inflated by enclosing_radius(probe level)
  // with probe level = knot_length / (probe_fraction * bbox diagonal).
  double probe_fraction = 0.25;
  unsigned threads = 0;
};

struct CriticalPoint {
  Vec3 position = Vec3::Zero();
  double value = 0.0;
  double grad_norm = 0.0;
  std::array<double, 3> eigenvalues{};  // ascending
  int index = 0;                        // number of negative eigenvalues
};

struct CriticalCluster {
  double value = 0.0;  // mean of member values
  std::vector<CriticalPoint> points;
  int m = 0;  // index-1 members
  int n = 0;  // index-2 members
};

struct NewtonTrace {
  Vec3 position;
  double grad_norm;
  int iterations;
  bool converged;
};

Box search_box(const FieldEvaluator& field, const SearchConfig& config);

// One damped Newton step on grad phi = 0. The full step x - H^{-1} grad is
// halved until |grad phi| decreases; when H is near singular the step
// descends |grad phi|^2 instead. Returns x unchanged when no trial point
// improves. TooCloseError propagates from the evaluation at x.
Vec3 newton_step(const FieldEvaluator& field, const Vec3& x);

// Iterates newton_step from x0 until |grad phi| <= tol, the iterate leaves
// `box`, progress stalls, or max_iter is reached.
NewtonTrace newton_solve(const FieldEvaluator& field, const Vec3& x0, double tol, int max_iter,
                         const Box& box);

// Eigen-decomposes the Hessian at x. Throws Error{DegenerateCriticalPoint}
// when an eigenvalue is within degenerate_tol * ||H||_F of zero.
CriticalPoint classify(const FieldEvaluator& field, const Vec3& x, double degenerate_tol);

// Multistart Newton over a regular seed grid plus pseudo-random seeds.
// Output is deduplicated, sorted by value, and independent of thread count.
std::vector<CriticalPoint> find_critical_points(const FieldEvaluator& field,
                                                const SearchConfig& config);

// 1e-5 of the critical value spread (floored for a single point).
double default_cluster_tol(const std::vector<CriticalPoint>& points);

// Greedy grouping of value-sorted points: a point joins the current cluster
// iff its value is within cluster_tol of the running mean.
std::vector<CriticalCluster> cluster_by_value(const std::vector<CriticalPoint>& points,
                                              double cluster_tol);

bool is_distinct(const std::vector<CriticalCluster>& clusters);

}  // namespace knotmorse
