#include "quadrature.hpp"

#include <cmath>
#include <numbers>

#include "curve.hpp"
#include "error.hpp"

namespace knotmorse {

std::vector<QuadratureNode> gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre order must be >= 1");
  std::vector<QuadratureNode> out(static_cast<std::size_t>(n));
  // Newton iteration on P_n from the Tricomi initial guess; nodes are
  // symmetric so only half are computed.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[static_cast<std::size_t>(i)] = {-x, w};
    out[static_cast<std::size_t>(n - 1 - i)] = {x, w};
  }
  if (n % 2 == 1) out[static_cast<std::size_t>(n / 2)].t = 0.0;
  return out;
}

QuadratureRule::QuadratureRule(int panels, int nodes_per_panel)
    : panels_(panels), nodes_per_panel_(nodes_per_panel) {
  if (panels < 1 || nodes_per_panel < 1)
    throw Error(ErrorCode::InvalidArgument, "quadrature panels and nodes must be positive");
  reference_ = gauss_legendre(nodes_per_panel);
  nodes_.reserve(static_cast<std::size_t>(panels) * nodes_per_panel);
  const double width = kTwoPi / panels;
  for (int p = 0; p < panels; ++p) {
    const auto mapped = map_to(p * width, (p + 1) * width);
    nodes_.insert(nodes_.end(), mapped.begin(), mapped.end());
  }
}

std::vector<QuadratureNode> QuadratureRule::map_to(double a, double b) const {
  std::vector<QuadratureNode> out;
  out.reserve(reference_.size());
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (const auto& n : reference_) out.push_back({mid + half * n.t, half * n.weight});
  return out;
}

}  // namespace knotmorse
