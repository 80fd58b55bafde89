#pragma once

#include <vector>

namespace knotmorse {

struct QuadratureNode {
  double t;
  double weight;
};

// Gauss-Legendre nodes and weights on [-1, 1], ascending.
std::vector<QuadratureNode> gauss_legendre(int n);

// Composite Gauss-Legendre rule over [0, 2pi]: `panels` equal panels with
// `nodes_per_panel` nodes each.
class QuadratureRule {
 public:
  QuadratureRule(int panels = 16, int nodes_per_panel = 16);

  int panels() const { return panels_; }
  int nodes_per_panel() const { return nodes_per_panel_; }
  const std::vector<QuadratureNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  // Nodes mapped onto [a, b].
  std::vector<QuadratureNode> map_to(double a, double b) const;

  // Reference nodes on [-1, 1].
  const std::vector<QuadratureNode>& reference() const { return reference_; }

 private:
  int panels_;
  int nodes_per_panel_;
  std::vector<QuadratureNode> reference_;
  std::vector<QuadratureNode> nodes_;
};

}  // namespace knotmorse
