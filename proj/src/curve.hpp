#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "expr.hpp"

namespace knotmorse {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct CurveSample {
  Vec3 point;
  Vec3 velocity;
  double speed;
};

// Closed parametric curve r(t), t in [0, 2pi], with symbolic first and second
// derivatives cached at construction. Immutable.
class KnotCurve {
 public:
  // Validates closedness and regularity; throws Error{OpenCurve | SingularCurve}.
  KnotCurve(Expr x, Expr y, Expr z);

  Vec3 point(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
  CurveSample sample(double t) const;

  const Expr& component(int axis) const { return r_[axis]; }
  const Expr& derivative(int axis) const { return dr_[axis]; }
  const Expr& second_derivative(int axis) const { return ddr_[axis]; }

  static constexpr double period() { return kTwoPi; }

  // "(x, y, z)" in the curve grammar; parse_curve(to_string()) reproduces the
  // curve up to floating-point formatting.
  std::string to_string() const;

 private:
  Expr r_[3];
  Expr dr_[3];
  Expr ddr_[3];
};

// Parses "(expr, expr, expr)".
KnotCurve parse_curve(std::string_view source);

// Built-in families: paper_trefoil, circle(radius), torus_knot(p, q, R, r).
// Throws Error{InvalidArgument} for unknown names or bad parameters.
KnotCurve builtin_curve(std::string_view name, std::span<const double> params = {});

// Adds a deterministic trigonometric polynomial of orders 1..4 to every
// coordinate. Coefficients come from a splitmix64 stream seeded by `seed` and
// are scaled so the pointwise displacement never exceeds `amplitude`.
KnotCurve perturb(const KnotCurve& curve, double amplitude, std::uint64_t seed);

// Number of samples used by the regularity check.
inline constexpr int kRegularityProbes = 4096;

}  // namespace knotmorse
