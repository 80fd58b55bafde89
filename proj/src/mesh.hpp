#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "curve.hpp"

namespace knotmorse {

class ScalarField;

// Indexed triangle mesh of one level set.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  double level = 0.0;

  bool empty() const { return triangles.empty(); }
};

struct ComponentTopology {
  int vertices = 0;
  int edges = 0;
  int faces = 0;
  int euler_char = 0;
  int genus = 0;
  double flux = 0.0;  // filled by attach_flux
};

struct TopologyReport {
  int components = 0;
  std::vector<ComponentTopology> per_component;
  int total_genus = 0;
};

// Connected component id per triangle (via shared edges), numbered in order
// of each component's first triangle.
std::vector<int> component_labels(const TriMesh& mesh);

// Components, V - E + F and genus per component. Throws Error{NonManifold}
// for an edge without exactly two incident triangles or with inconsistent
// winding, Error{Topology} for an odd Euler characteristic.
TopologyReport topology(const TriMesh& mesh);

// Outward flux of E = -grad(field) through each component, with E sampled at
// triangle centroids. Order matches topology().per_component.
std::vector<double> flux(const ScalarField& field, const TriMesh& mesh);

void attach_flux(TopologyReport& report, const std::vector<double>& fluxes);

double triangle_area(const TriMesh& mesh, std::size_t tri);

// ASCII OBJ (`v x y z`, `f i j k`, 1-based). Written to a temporary file and
// renamed into place. Throws Error{InvalidArgument} for an empty mesh,
// Error{Io} on failure.
void export_obj(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh import_obj(const std::filesystem::path& path);

}  // namespace knotmorse
