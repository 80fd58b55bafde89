#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "curve.hpp"
#include "quadrature.hpp"

namespace knotmorse {

struct Box {
  Vec3 lo;
  Vec3 hi;

  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return extent().norm(); }
  Box inflated(double r) const { return {lo.array() - r, hi.array() + r}; }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

struct FieldOptions {
  int panels = 16;
  int nodes_per_panel = 16;
  // Panels closer to the evaluation point than their own arclength are
  // bisected, up to this many times.
  int refine_depth = 8;
  // Exclusion radius; <= 0 selects the default derived from the finest
  // refinement level.
  double min_distance = 0.0;
};

struct FieldSample {
  double potential = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

// Potential of the uniformly charged knot (unit charge per unit arclength),
//   phi(x) = integral |r'(t)| / |x - r(t)| dt,
// with its gradient and Hessian obtained by differentiating the integrand.
// Quadrature is composite Gauss-Legendre with hierarchical bisection of the
// panels that are near the evaluation point. Immutable and thread-safe.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(KnotCurve curve, FieldOptions options = {});

  double potential(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  Mat3 hessian(const Vec3& x) const;
  FieldSample evaluate(const Vec3& x) const;

  // As potential() but returns nullopt instead of throwing inside the
  // exclusion radius.
  std::optional<double> try_potential(const Vec3& x) const;

  // Coarse minimum over the base quadrature nodes, polished by five Newton
  // steps on t -> |x - r(t)|^2.
  double distance_to_knot(const Vec3& x) const;

  // Radius R with phi(x) < level whenever dist(x, knot_bbox) > R.
  double enclosing_radius(double level) const;

  // Enclosure of the quadrature sum for phi over the ball |x - center| <= radius.
  // nullopt when the ball reaches a quadrature node.
  std::optional<std::pair<double, double>> potential_bounds(const Vec3& center,
                                                            double radius) const;

  const KnotCurve& curve() const;
  const QuadratureRule& rule() const;
  const FieldOptions& options() const;
  double min_distance() const;
  double knot_length() const;
  double max_speed() const;
  const Box& knot_bbox() const;

  // Base-rule node positions (one per quadrature node).
  std::vector<Vec3> base_points() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace knotmorse
