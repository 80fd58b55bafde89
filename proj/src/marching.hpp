#pragma once

#include <array>
#include <functional>
#include <optional>
#include <utility>

#include "field.hpp"
#include "mesh.hpp"

namespace knotmorse {

// Scalar field consumed by the isosurface extractor. Surfaces are extracted
// as boundaries of the region {value >= level}; normals point towards
// decreasing value.
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  // +infinity marks points where the field cannot be evaluated because they
  // sit on a singularity; such points count as above every level.
  virtual double value(const Vec3& p) const = 0;
  virtual Vec3 gradient(const Vec3& p) const = 0;

  // Optional enclosure of the field over a ball, used to skip grid blocks
  // that cannot meet the level set.
  virtual std::optional<std::pair<double, double>> range(const Vec3& /*center*/,
                                                         double /*radius*/) const {
    return std::nullopt;
  }
};

// The knot potential as a ScalarField.
class PotentialField final : public ScalarField {
 public:
  explicit PotentialField(FieldEvaluator field) : field_(std::move(field)) {}

  double value(const Vec3& p) const override;
  Vec3 gradient(const Vec3& p) const override { return field_.gradient(p); }
  std::optional<std::pair<double, double>> range(const Vec3& c, double r) const override {
    return field_.potential_bounds(c, r);
  }

  const FieldEvaluator& evaluator() const { return field_; }

 private:
  FieldEvaluator field_;
};

// Closed-form field for tests and analytic overrides.
class FunctionField final : public ScalarField {
 public:
  FunctionField(std::function<double(const Vec3&)> value, std::function<Vec3(const Vec3&)> grad)
      : value_(std::move(value)), grad_(std::move(grad)) {}

  double value(const Vec3& p) const override { return value_(p); }
  Vec3 gradient(const Vec3& p) const override { return grad_(p); }

 private:
  std::function<double(const Vec3&)> value_;
  std::function<Vec3(const Vec3&)> grad_;
};

struct GridSpec {
  Box box;
  std::array<int, 3> cells{};  // per axis; vertices are cells + 1

  double spacing() const { return box.extent().x() / cells[0]; }
  Vec3 vertex(int i, int j, int k) const {
    return box.lo + spacing() * Vec3(i, j, k);
  }
};

inline constexpr int kMinGridResolution = 16;

// Cubic cells of edge extent.maxCoeff()/resolution covering `box`; the box is
// grown symmetrically to a whole number of cells on the shorter axes.
GridSpec make_grid(const Box& box, int resolution);

// Grid for the level set phi = level: knot bbox inflated by
// (1 + margin) * enclosing_radius(level).
GridSpec grid_for_level(const FieldEvaluator& field, double level, int resolution,
                        double margin = 0.1);

struct ExtractOptions {
  unsigned threads = 0;
  int leaf_cells = 4;   // cells per leaf block edge
  int root_cells = 32;  // cells per top-level block edge
};

struct ExtractStats {
  long long evaluated_vertices = 0;
  long long leaf_blocks = 0;
  long long pruned_blocks = 0;
};

// Marching cubes with linear edge interpolation. Polygons are traced cell by
// cell over the faces; ambiguous faces are resolved with the asymptotic
// decider, so neighbouring cells agree and the mesh is watertight. Loops of
// four or more points are fanned around their centroid. Blocks whose field
// range excludes the level are skipped. Throws Error{BoundaryClipping} when
// the region {value >= level} reaches the grid boundary.
TriMesh extract_isosurface(const ScalarField& field, double level, const GridSpec& grid,
                           const ExtractOptions& options = {}, ExtractStats* stats = nullptr);

}  // namespace knotmorse
