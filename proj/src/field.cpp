#include "field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace knotmorse {

namespace {

struct Node {
  double x, y, z;
  double weight;  // quadrature weight times |r'(t)|
  double t;
};

struct Panel {
  Vec3 center;
  double radius;
  double arclength;
  int first_node;
  int first_child;  // -1 at the finest level
};

}  // namespace

struct FieldEvaluator::Impl {
  Impl(KnotCurve c, FieldOptions o)
      : curve(std::move(c)), options(o), rule(o.panels, o.nodes_per_panel) {}

  KnotCurve curve;
  FieldOptions options;
  QuadratureRule rule;
  std::vector<Panel> panels;
  std::vector<Node> nodes;
  double min_distance = 0.0;
  double finest_spacing = 0.0;
  double knot_length = 0.0;
  double max_speed = 0.0;
  Box bbox;

  int add_panel(double a, double b) {
    Panel p;
    p.first_node = static_cast<int>(nodes.size());
    p.first_child = -1;
    p.arclength = 0.0;
    const auto mapped = rule.map_to(a, b);
    Vec3 mean = Vec3::Zero();
    std::vector<Vec3> pts;
    std::vector<double> ts;
    pts.push_back(curve.point(a));
    ts.push_back(a);
    for (const auto& q : mapped) {
      const Vec3 r = curve.point(q.t);
      const double speed = curve.velocity(q.t).norm();
      max_speed = std::max(max_speed, speed);
      nodes.push_back({r.x(), r.y(), r.z(), q.weight * speed, q.t});
      p.arclength += q.weight * speed;
      mean += r;
      pts.push_back(r);
      ts.push_back(q.t);
    }
    pts.push_back(curve.point(b));
    ts.push_back(b);
    mean /= static_cast<double>(mapped.size());
    double radius = 0.0, gap = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      radius = std::max(radius, (pts[i] - mean).norm());
      if (i + 1 < pts.size()) {
        // Arc between consecutive samples, bounded by the sampled speed.
        const double tm = 0.5 * (ts[i] + ts[i + 1]);
        const double arc = (ts[i + 1] - ts[i]) *
                           std::max({curve.velocity(ts[i]).norm(), curve.velocity(tm).norm(),
                                     curve.velocity(ts[i + 1]).norm()});
        gap = std::max(gap, arc);
      }
    }
    p.center = mean;
    p.radius = radius + 0.5 * gap;
    panels.push_back(p);
    return static_cast<int>(panels.size()) - 1;
  }

  void build() {
    const int depth = options.refine_depth;
    if (depth < 0 || depth > 20)
      throw Error(ErrorCode::InvalidArgument, "refine_depth must be in [0, 20]");
    const int base = rule.panels();
    std::vector<std::pair<double, double>> level_ranges;
    const double width = kTwoPi / base;
    for (int p = 0; p < base; ++p) {
      add_panel(p * width, (p + 1) * width);
      level_ranges.emplace_back(p * width, (p + 1) * width);
    }
    int level_begin = 0;
    for (int level = 0; level < depth; ++level) {
      const int level_end = static_cast<int>(panels.size());
      std::vector<std::pair<double, double>> next;
      for (int i = level_begin; i < level_end; ++i) {
        const auto [a, b] = level_ranges[static_cast<std::size_t>(i - level_begin)];
        const double m = 0.5 * (a + b);
        const int child = add_panel(a, m);
        add_panel(m, b);
        panels[static_cast<std::size_t>(i)].first_child = child;
        next.emplace_back(a, m);
        next.emplace_back(m, b);
      }
      level_ranges = std::move(next);
      level_begin = level_end;
    }

    double finest_arc = 0.0;
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::size_t i = static_cast<std::size_t>(level_begin); i < panels.size(); ++i) {
      const Panel& p = panels[i];
      finest_arc = std::max(finest_arc, p.arclength);
      for (int k = 0; k < rule.nodes_per_panel(); ++k) {
        const Node& n = nodes[static_cast<std::size_t>(p.first_node + k)];
        const Vec3 r(n.x, n.y, n.z);
        lo = lo.cwiseMin(r);
        hi = hi.cwiseMax(r);
      }
    }
    finest_spacing = 2.0 * finest_arc / rule.nodes_per_panel();
    bbox = Box{lo, hi}.inflated(finest_spacing);

    for (int p = 0; p < base; ++p) knot_length += panels[static_cast<std::size_t>(p)].arclength;
    min_distance = options.min_distance > 0.0 ? options.min_distance : 0.5 * finest_arc;
  }

  // Visits every node of the adaptive rule for `x`, where panels whose
  // bounding sphere (grown by `inflate`) lies within one panel arclength of x
  // are replaced by their children.
  template <class Visit>
  void sweep(const Vec3& x, double inflate, Visit&& visit) const {
    thread_local std::vector<int> stack;
    stack.clear();
    const int base = rule.panels();
    for (int p = base - 1; p >= 0; --p) stack.push_back(p);
    const int npp = rule.nodes_per_panel();
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      const Panel& p = panels[static_cast<std::size_t>(idx)];
      if (p.first_child >= 0 &&
          (x - p.center).norm() - p.radius - inflate < p.arclength) {
        stack.push_back(p.first_child + 1);
        stack.push_back(p.first_child);
        continue;
      }
      const Node* n = nodes.data() + p.first_node;
      for (int k = 0; k < npp; ++k) visit(n[k]);
    }
  }

  double polish_distance(const Vec3& x, double t) const {
    double best = (x - curve.point(t)).norm();
    for (int step = 0; step < 5; ++step) {
      const Vec3 d = x - curve.point(t);
      const Vec3 v = curve.velocity(t);
      const Vec3 a = curve.acceleration(t);
      const double g1 = -d.dot(v);
      const double g2 = v.squaredNorm() - d.dot(a);
      double dt = g2 > 0.0 ? -g1 / g2 : -g1 / std::max(v.squaredNorm(), 1e-300);
      const double cap = kTwoPi / (rule.panels() * 2.0);
      dt = std::clamp(dt, -cap, cap);
      t += dt;
      best = std::min(best, (x - curve.point(t)).norm());
    }
    return best;
  }

  void guard(const Vec3& x, double nearest, double t_nearest) const {
    if (!std::isfinite(nearest)) throw TooCloseError(0.0, min_distance);
    if (nearest >= min_distance + finest_spacing) return;
    const double d = std::min(nearest, polish_distance(x, t_nearest));
    if (d < min_distance) throw TooCloseError(d, min_distance);
  }

  double potential(const Vec3& x, bool& too_close) const {
    double phi = 0.0, nearest2 = std::numeric_limits<double>::infinity(), t_nearest = 0.0;
    sweep(x, 0.0, [&](const Node& n) {
      const double dx = x.x() - n.x, dy = x.y() - n.y, dz = x.z() - n.z;
      const double r2 = dx * dx + dy * dy + dz * dz;
      if (r2 < nearest2) {
        nearest2 = r2;
        t_nearest = n.t;
      }
      phi += n.weight / std::sqrt(r2);
    });
    too_close = false;
    const double nearest = std::sqrt(nearest2);
    if (nearest < min_distance + finest_spacing) {
      try {
        guard(x, nearest, t_nearest);
      } catch (const TooCloseError&) {
        too_close = true;
      }
    }
    return phi;
  }

  template <int Order>
  FieldSample evaluate(const Vec3& x) const {
    double phi = 0.0;
    double g[3] = {0.0, 0.0, 0.0};
    double h[6] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};  // xx yy zz xy xz yz
    double nearest2 = std::numeric_limits<double>::infinity(), t_nearest = 0.0;
    sweep(x, 0.0, [&](const Node& n) {
      const double dx = x.x() - n.x, dy = x.y() - n.y, dz = x.z() - n.z;
      const double r2 = dx * dx + dy * dy + dz * dz;
      if (r2 < nearest2) {
        nearest2 = r2;
        t_nearest = n.t;
      }
      const double inv = 1.0 / std::sqrt(r2);
      const double w1 = n.weight * inv;
      phi += w1;
      if constexpr (Order >= 1) {
        const double w3 = w1 * inv * inv;
        g[0] -= w3 * dx;
        g[1] -= w3 * dy;
        g[2] -= w3 * dz;
        if constexpr (Order >= 2) {
          const double w5 = 3.0 * w3 * inv * inv;
          h[0] += w5 * dx * dx - w3;
          h[1] += w5 * dy * dy - w3;
          h[2] += w5 * dz * dz - w3;
          h[3] += w5 * dx * dy;
          h[4] += w5 * dx * dz;
          h[5] += w5 * dy * dz;
        }
      }
    });
    guard(x, std::sqrt(nearest2), t_nearest);
    FieldSample s;
    s.potential = phi;
    s.gradient = Vec3(g[0], g[1], g[2]);
    s.hessian << h[0], h[3], h[4], h[3], h[1], h[5], h[4], h[5], h[2];
    return s;
  }
};

FieldEvaluator::FieldEvaluator(KnotCurve curve, FieldOptions options) {
  auto impl = std::make_shared<Impl>(std::move(curve), options);
  impl->build();
  impl_ = std::move(impl);
}

double FieldEvaluator::potential(const Vec3& x) const { return impl_->evaluate<0>(x).potential; }

Vec3 FieldEvaluator::gradient(const Vec3& x) const { return impl_->evaluate<1>(x).gradient; }

Mat3 FieldEvaluator::hessian(const Vec3& x) const { return impl_->evaluate<2>(x).hessian; }

FieldSample FieldEvaluator::evaluate(const Vec3& x) const { return impl_->evaluate<2>(x); }

std::optional<double> FieldEvaluator::try_potential(const Vec3& x) const {
  bool too_close = false;
  const double phi = impl_->potential(x, too_close);
  if (too_close || !std::isfinite(phi)) return std::nullopt;
  return phi;
}

double FieldEvaluator::distance_to_knot(const Vec3& x) const {
  const Impl& m = *impl_;
  const int npp = m.rule.nodes_per_panel();
  double best = std::numeric_limits<double>::infinity(), t_best = 0.0;
  for (int p = 0; p < m.rule.panels(); ++p) {
    const Node* n = m.nodes.data() + m.panels[static_cast<std::size_t>(p)].first_node;
    for (int k = 0; k < npp; ++k) {
      const double d = (x - Vec3(n[k].x, n[k].y, n[k].z)).norm();
      if (d < best) {
        best = d;
        t_best = n[k].t;
      }
    }
  }
  return std::min(best, m.polish_distance(x, t_best));
}

double FieldEvaluator::enclosing_radius(double level) const {
  if (!(level > 0.0)) throw Error(ErrorCode::InvalidArgument, "level must be positive");
  return impl_->knot_length / level;
}

std::optional<std::pair<double, double>> FieldEvaluator::potential_bounds(const Vec3& c,
                                                                          double radius) const {
  double lo = 0.0, hi = 0.0;
  bool touches = false;
  impl_->sweep(c, radius, [&](const Node& n) {
    const double d = (c - Vec3(n.x, n.y, n.z)).norm();
    if (d <= radius) {
      touches = true;
      return;
    }
    lo += n.weight / (d + radius);
    hi += n.weight / (d - radius);
  });
  if (touches) return std::nullopt;
  return std::make_pair(lo, hi);
}

const KnotCurve& FieldEvaluator::curve() const { return impl_->curve; }
const QuadratureRule& FieldEvaluator::rule() const { return impl_->rule; }
const FieldOptions& FieldEvaluator::options() const { return impl_->options; }
double FieldEvaluator::min_distance() const { return impl_->min_distance; }
double FieldEvaluator::knot_length() const { return impl_->knot_length; }
double FieldEvaluator::max_speed() const { return impl_->max_speed; }
const Box& FieldEvaluator::knot_bbox() const { return impl_->bbox; }

std::vector<Vec3> FieldEvaluator::base_points() const {
  std::vector<Vec3> out;
  for (const auto& q : impl_->rule.nodes()) out.push_back(impl_->curve.point(q.t));
  return out;
}

}  // namespace knotmorse
