#include "curve.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "error.hpp"

namespace knotmorse {

namespace {

constexpr double kClosedTol = 1e-9;

// Minimum allowed speed relative to the mean speed; below this the
// parametrization is treated as singular.
constexpr double kSingularSpeedRatio = 1e-6;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [-1, 1).
  double symmetric() { return static_cast<double>(next() >> 11) * 0x1.0p-52 - 1.0; }

 private:
  std::uint64_t state_;
};

std::vector<std::string_view> split_top_level(std::string_view src, std::size_t& offset) {
  // Strip the outer parentheses, then split on commas at nesting depth 0.
  std::size_t b = 0;
  while (b < src.size() && std::isspace(static_cast<unsigned char>(src[b]))) ++b;
  std::size_t e = src.size();
  while (e > b && std::isspace(static_cast<unsigned char>(src[e - 1]))) --e;
  if (b >= e || src[b] != '(')
    throw Error(ErrorCode::Syntax, "syntax error at offset " + std::to_string(b) +
                                       ": curve must have the form (x, y, z)");
  if (src[e - 1] != ')')
    throw Error(ErrorCode::Syntax, "syntax error at offset " + std::to_string(e - 1) +
                                       ": expected ')' closing the curve tuple");
  offset = b + 1;
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = b + 1;
  for (std::size_t i = b + 1; i < e - 1; ++i) {
    const char c = src[i];
    if (c == '(') ++depth;
    if (c == ')') {
      if (--depth < 0)
        throw Error(ErrorCode::Syntax,
                    "syntax error at offset " + std::to_string(i) + ": unbalanced ')'");
    }
    if (c == ',' && depth == 0) {
      parts.push_back(src.substr(start, i - start));
      start = i + 1;
    }
  }
  if (depth != 0)
    throw Error(ErrorCode::Syntax,
                "syntax error at offset " + std::to_string(e - 1) + ": unbalanced '('");
  parts.push_back(src.substr(start, e - 1 - start));
  if (parts.size() != 3)
    throw Error(ErrorCode::Syntax, "syntax error: curve needs exactly 3 components, got " +
                                       std::to_string(parts.size()));
  return parts;
}

}  // namespace

KnotCurve::KnotCurve(Expr x, Expr y, Expr z) : r_{std::move(x), std::move(y), std::move(z)} {
  for (int a = 0; a < 3; ++a) {
    dr_[a] = differentiate(r_[a]);
    ddr_[a] = differentiate(dr_[a]);
  }

  const Vec3 gap = point(0.0) - point(kTwoPi);
  if (gap.cwiseAbs().maxCoeff() >= kClosedTol) {
    std::ostringstream os;
    os << "curve is not closed: |r(0) - r(2pi)| = " << gap.norm();
    throw Error(ErrorCode::OpenCurve, os.str());
  }

  const double dt = kTwoPi / kRegularityProbes;
  std::vector<double> speed(kRegularityProbes);
  double mean = 0.0;
  for (int i = 0; i < kRegularityProbes; ++i) {
    const double t = dt * (i + 0.5);
    speed[static_cast<std::size_t>(i)] = velocity(t).norm();
    if (!std::isfinite(speed[static_cast<std::size_t>(i)])) {
      throw Error(ErrorCode::SingularCurve,
                  "curve derivative is not finite at t = " + std::to_string(t));
    }
    mean += speed[static_cast<std::size_t>(i)] / kRegularityProbes;
  }
  // A cusp between two probes still shows up as a sampled local minimum of
  // the speed; golden-section search around each one finds its true depth.
  const auto lowest = std::min_element(speed.begin(), speed.end());
  double min_speed = *lowest;
  double t_min = dt * (static_cast<double>(lowest - speed.begin()) + 0.5);
  for (int i = 0; i < kRegularityProbes; ++i) {
    const double s = speed[static_cast<std::size_t>(i)];
    const double prev = speed[static_cast<std::size_t>((i + kRegularityProbes - 1) % kRegularityProbes)];
    const double next = speed[static_cast<std::size_t>((i + 1) % kRegularityProbes)];
    if (!(s < prev && s <= next)) continue;
    double a = dt * (i - 0.5), b = dt * (i + 1.5);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = velocity(c).norm(), fd = velocity(d).norm();
    for (int it = 0; it < 60; ++it) {
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - ratio * (b - a);
        fc = velocity(c).norm();
      } else {
        a = c; c = d; fc = fd;
        d = a + ratio * (b - a);
        fd = velocity(d).norm();
      }
    }
    const double local = std::min({s, fc, fd});
    if (local < min_speed) {
      min_speed = local;
      t_min = fc < fd ? c : d;
    }
  }
  if (!(mean > 0.0) || min_speed < kSingularSpeedRatio * mean) {
    throw Error(ErrorCode::SingularCurve,
                "parametrization is singular: |r'(t)| = " + std::to_string(min_speed) +
                    " at t = " + std::to_string(t_min));
  }
}

Vec3 KnotCurve::point(double t) const { return {r_[0](t), r_[1](t), r_[2](t)}; }

Vec3 KnotCurve::velocity(double t) const { return {dr_[0](t), dr_[1](t), dr_[2](t)}; }

Vec3 KnotCurve::acceleration(double t) const { return {ddr_[0](t), ddr_[1](t), ddr_[2](t)}; }

CurveSample KnotCurve::sample(double t) const {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  CurveSample s{point(t), velocity(t), 0.0};
  s.speed = s.velocity.norm();
  return s;
}

std::string KnotCurve::to_string() const {
  return "(" + r_[0].to_string() + ", " + r_[1].to_string() + ", " + r_[2].to_string() + ")";
}

KnotCurve parse_curve(std::string_view source) {
  std::size_t offset = 0;
  const auto parts = split_top_level(source, offset);
  Expr comps[3];
  std::size_t at = offset;
  for (int i = 0; i < 3; ++i) {
    try {
      comps[i] = parse_expr(parts[i]);
    } catch (const Error& e) {
      // Re-anchor positions to the full source text.
      std::string msg = e.what();
      const std::string key = "offset ";
      const auto k = msg.find(key);
      if (k != std::string::npos) {
        std::size_t end = k + key.size();
        std::size_t local = 0;
        while (end < msg.size() && std::isdigit(static_cast<unsigned char>(msg[end])))
          local = local * 10 + static_cast<std::size_t>(msg[end++] - '0');
        msg = msg.substr(0, k + key.size()) + std::to_string(local + at) + msg.substr(end);
      }
      throw Error(e.code(), msg + " (component " + "xyz"[i] + ")");
    }
    at += parts[i].size() + 1;
  }
  return KnotCurve(std::move(comps[0]), std::move(comps[1]), std::move(comps[2]));
}

KnotCurve builtin_curve(std::string_view name, std::span<const double> params) {
  if (name == "paper_trefoil") {
    if (!params.empty())
      throw Error(ErrorCode::InvalidArgument, "paper_trefoil takes no parameters");
    return parse_curve("(sin(t) + 2*sin(2*t), cos(t) - 2*cos(2*t), -sin(3*t))");
  }
  const Expr t = Expr::variable();
  if (name == "circle") {
    const double radius = params.empty() ? 1.0 : params[0];
    if (params.size() > 1)
      throw Error(ErrorCode::InvalidArgument, "circle takes one parameter (radius)");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw Error(ErrorCode::InvalidArgument, "circle radius must be positive");
    const Expr rad = Expr::constant(radius);
    return KnotCurve(rad * cos(t), rad * sin(t), Expr::constant(0.0));
  }
  if (name == "torus_knot") {
    if (params.size() != 4)
      throw Error(ErrorCode::InvalidArgument, "torus_knot takes four parameters (p, q, R, r)");
    const double p = params[0], q = params[1], big = params[2], small = params[3];
    if (p != std::floor(p) || q != std::floor(q) || p < 1 || q < 1)
      throw Error(ErrorCode::InvalidArgument, "torus_knot p and q must be positive integers");
    if (!(big > small && small > 0.0))
      throw Error(ErrorCode::InvalidArgument, "torus_knot requires R > r > 0");
    // gcd(p, q) != 1 gives a multiply traced curve; allowed (warning only at the CLI).
    const Expr pt = Expr::constant(p) * t;
    const Expr qt = Expr::constant(q) * t;
    const Expr radial = Expr::constant(big) + Expr::constant(small) * cos(qt);
    return KnotCurve(radial * cos(pt), radial * sin(pt), Expr::constant(small) * sin(qt));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown builtin curve '" + std::string(name) + "'");
}

KnotCurve perturb(const KnotCurve& curve, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw Error(ErrorCode::InvalidArgument, "perturbation amplitude must be >= 0");
  if (amplitude == 0.0) return curve;

  SplitMix64 rng(seed);
  std::vector<double> coeffs[3];
  for (auto& c : coeffs)
    for (int i = 0; i < 8; ++i) c.push_back(rng.symmetric());
  // |sum a cos + b sin| <= sum |a| + |b| per axis; scale the vector bound.
  double bound2 = 0.0;
  for (const auto& c : coeffs) {
    const double s = std::accumulate(c.begin(), c.end(), 0.0,
                                     [](double acc, double v) { return acc + std::abs(v); });
    bound2 += s * s;
  }
  const double scale = amplitude / std::sqrt(bound2);

  const Expr t = Expr::variable();
  Expr out[3];
  for (int a = 0; a < 3; ++a) {
    Expr delta = Expr::constant(0.0);
    for (int k = 1; k <= 4; ++k) {
      const Expr kt = Expr::constant(k) * t;
      delta = delta + Expr::constant(coeffs[a][2 * (k - 1)] * scale) * cos(kt) +
              Expr::constant(coeffs[a][2 * (k - 1) + 1] * scale) * sin(kt);
    }
    out[a] = curve.component(a) + delta;
  }
  try {
    return KnotCurve(std::move(out[0]), std::move(out[1]), std::move(out[2]));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularCurve)
      throw Error(ErrorCode::SingularCurve,
                  std::string(e.what()) + "; try a smaller perturbation amplitude");
    throw;
  }
}

}  // namespace knotmorse
