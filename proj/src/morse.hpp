#pragma once

#include <limits>
#include <string>
#include <vector>

#include "critical.hpp"
#include "marching.hpp"

namespace knotmorse {

// Offsets of the regular values above each critical value.
struct EpsilonPolicy {
  double gap_fraction = 0.4;
  double cap = std::numeric_limits<double>::infinity();  // absolute upper bound on an offset
};

// One level below every cluster, then one above each cluster:
//   below all      0.5 * V_1
//   after V_i      V_i + min(gap_fraction * (V_{i+1} - V_i), cap)
//   after V_last   V_last + min(gap_fraction * (V_last - V_prev), cap), or 1.1 * V for one cluster
// Throws Error{ClustersTooClose} when two cluster values are closer than
// 10 * cluster_tol, Error{InvalidArgument} when the cap pushes a value within
// a tenth of the local gap of a critical value.
std::vector<double> choose_regular_values(const std::vector<CriticalCluster>& clusters,
                                          double cluster_tol, const EpsilonPolicy& policy = {});

// Grid resolution is chosen per level so that the thinnest feature of the
// level set spans `cells_per_feature` cells: the tube around the knot, or
// the neck of the level set near a critical point.
struct GridPolicy {
  int base_resolution = 128;
  int max_resolution = 1024;
  double cells_per_feature = 1.5;
  double margin = 0.1;
  // Re-extract at twice the resolution and require identical topology.
  bool stability_check = true;
};

// Smallest distance from the knot at which phi falls below `level`, taken
// over rays normal to the curve at `samples` parameter values and
// `directions` angles each. Bisection to a relative precision of 1e-4.
double estimate_tube_radius(const FieldEvaluator& field, double level, int samples = 256,
                            int directions = 8);

// min(tube radius, sqrt(2 |level - V| / max|lambda|) over critical points).
double feature_size(const FieldEvaluator& field, double level,
                    const std::vector<CriticalPoint>& points);

GridSpec grid_for_policy(const FieldEvaluator& field, double level,
                         const std::vector<CriticalPoint>& points, const GridPolicy& policy);

struct LevelSurface {
  double level = 0.0;
  std::array<int, 3> cells{};
  TopologyReport topology;
  std::array<int, 3> check_cells{};  // zero when the stability check is off
  TriMesh mesh;                      // empty unless kept
};

// Extracts phi = level on the policy grid, computes topology and flux, and
// runs the doubling check. Throws Error{UnstableGenus} if the check
// disagrees.
LevelSurface extract_level(const FieldEvaluator& field, double level,
                           const std::vector<CriticalPoint>& points, const GridPolicy& policy,
                           unsigned threads, bool keep_mesh);

struct MorseCode {
  std::vector<int> genera;  // G_0 .. G_N'
  bool distinct = false;
  std::vector<double> regular_values;  // one per entry of genera
};

struct MorseAnalysis {
  MorseCode code;
  std::vector<LevelSurface> surfaces;  // parallel to code.regular_values
};

// Extracts the level set at every regular value. G_0 is the measured genus
// of the lowest surface; the remaining entries are total genera.
MorseAnalysis assemble_morse_code(const FieldEvaluator& field,
                                  const std::vector<CriticalCluster>& clusters,
                                  const std::vector<double>& regular_values,
                                  const GridPolicy& policy, unsigned threads,
                                  bool keep_meshes);

struct Check {
  std::string name;
  bool passed = false;
  bool applicable = true;  // false: vacuous for this run, counted as passed
  std::string details;
};

struct VerificationReport {
  std::vector<Check> checks;  // code_endpoints, index_balance, unit_steps, index_steps,
                              // first_step_one, flux_positivity, connectedness
  bool all_passed() const;
  const Check& at(const std::string& name) const;
};

// Pure function of its inputs; failures are recorded, never thrown.
VerificationReport verify(const MorseCode& code, const std::vector<CriticalCluster>& clusters,
                          const std::vector<LevelSurface>& surfaces);

}  // namespace knotmorse
