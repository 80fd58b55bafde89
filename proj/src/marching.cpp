#include "marching.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "error.hpp"
#include "parallel.hpp"

namespace knotmorse {

namespace {

// Interpolation parameter is kept away from the cell corners so no triangle
// collapses onto a grid vertex.
constexpr double kEdgeClamp = 1e-3;
constexpr float kSaturated = FLT_MAX / 4;

struct CubeTables {
  int corner[8][3];
  int edge_c0[12];
  int edge_c1[12];
  int edge_axis[12];
  int edge_of[8][8];
  int face_corner[6][4];  // counter-clockwise seen from outside the cube
  int face_edge[6][4];    // edge between face corners k and k+1

  CubeTables() {
    for (int c = 0; c < 8; ++c) {
      corner[c][0] = c & 1;
      corner[c][1] = (c >> 1) & 1;
      corner[c][2] = (c >> 2) & 1;
    }
    for (auto& row : edge_of) std::fill(std::begin(row), std::end(row), -1);
    int e = 0;
    for (int axis = 0; axis < 3; ++axis) {
      for (int c = 0; c < 8; ++c) {
        if (corner[c][axis] != 0) continue;
        const int c1 = c | (1 << axis);
        edge_c0[e] = c;
        edge_c1[e] = c1;
        edge_axis[e] = axis;
        edge_of[c][c1] = edge_of[c1][c] = e;
        ++e;
      }
    }
    int f = 0;
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      for (int side = 0; side < 2; ++side, ++f) {
        const int uv[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        int order[4];
        for (int k = 0; k < 4; ++k) {
          order[k] = (side << axis) | (uv[k][0] << u) | (uv[k][1] << v);
        }
        // (u, v) order circulates around +axis; reverse for the low face.
        for (int k = 0; k < 4; ++k) face_corner[f][k] = side ? order[k] : order[3 - k];
        for (int k = 0; k < 4; ++k)
          face_edge[f][k] = edge_of[face_corner[f][k]][face_corner[f][(k + 1) % 4]];
      }
    }
  }
};

const CubeTables& tables() {
  static const CubeTables t;
  return t;
}

struct Block {
  std::array<int, 3> lo;  // first cell
  std::array<int, 3> hi;  // one past last cell
};

struct Leaf {
  Block block;
  std::vector<float> values;  // value - level at block vertices, x fastest
  int nx() const { return block.hi[0] - block.lo[0] + 1; }
  int ny() const { return block.hi[1] - block.lo[1] + 1; }
  float at(int i, int j, int k) const {
    return values[static_cast<std::size_t>((k * ny() + j) * nx() + i)];
  }
};

std::string describe_clip(const Vec3& p, double level) {
  std::ostringstream os;
  os.precision(6);
  os << "level set " << level << " is clipped by the grid boundary near (" << p.x() << ", "
     << p.y() << ", " << p.z() << "); enlarge the grid box";
  return os.str();
}

class Extractor {
 public:
  Extractor(const ScalarField& field, double level, const GridSpec& grid,
            const ExtractOptions& opt)
      : field_(field), level_(level), grid_(grid), opt_(opt), h_(grid.spacing()) {
    delta_ = 1e-9 * std::max(1.0, std::abs(level));
  }

  TriMesh run(ExtractStats* stats) {
    std::vector<Block> roots;
    const int rc = std::max(opt_.root_cells, opt_.leaf_cells);
    for (int k = 0; k < grid_.cells[2]; k += rc)
      for (int j = 0; j < grid_.cells[1]; j += rc)
        for (int i = 0; i < grid_.cells[0]; i += rc)
          roots.push_back({{i, j, k},
                           {std::min(i + rc, grid_.cells[0]), std::min(j + rc, grid_.cells[1]),
                            std::min(k + rc, grid_.cells[2])}});

    std::vector<std::vector<Block>> leaves_per_root(roots.size());
    std::vector<long long> pruned_per_root(roots.size(), 0);
    parallel_for(roots.size(), opt_.threads, [&](std::size_t r) {
      classify(roots[r], leaves_per_root[r], pruned_per_root[r]);
    });

    std::vector<Leaf> leaves;
    long long pruned = 0;
    for (std::size_t r = 0; r < roots.size(); ++r) {
      pruned += pruned_per_root[r];
      for (const Block& b : leaves_per_root[r]) leaves.push_back({b, {}});
    }

    // Neighbouring leaves share their faces; each grid vertex is evaluated once.
    std::vector<std::uint64_t> keys;
    for (const Leaf& leaf : leaves) {
      const Block& b = leaf.block;
      for (int k = b.lo[2]; k <= b.hi[2]; ++k)
        for (int j = b.lo[1]; j <= b.hi[1]; ++j)
          for (int i = b.lo[0]; i <= b.hi[0]; ++i) keys.push_back(vertex_key(i, j, k));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<float> values(keys.size());
    parallel_for(keys.size(), opt_.threads, [&](std::size_t n) { values[n] = sample(keys[n]); });
    for (Leaf& leaf : leaves) {
      const Block& b = leaf.block;
      leaf.values.reserve(static_cast<std::size_t>(leaf.nx()) * leaf.ny() *
                          (b.hi[2] - b.lo[2] + 1));
      auto it = keys.begin();
      for (int k = b.lo[2]; k <= b.hi[2]; ++k)
        for (int j = b.lo[1]; j <= b.hi[1]; ++j)
          for (int i = b.lo[0]; i <= b.hi[0]; ++i) {
            it = std::lower_bound(it, keys.end(), vertex_key(i, j, k));
            leaf.values.push_back(values[static_cast<std::size_t>(it - keys.begin())]);
          }
    }

    TriMesh mesh;
    mesh.level = level_;
    for (const Leaf& leaf : leaves) polygonize(leaf, mesh);

    if (stats) {
      stats->leaf_blocks = static_cast<long long>(leaves.size());
      stats->pruned_blocks = pruned;
      stats->evaluated_vertices = static_cast<long long>(keys.size());
    }
    return mesh;
  }

 private:
  bool touches_boundary(const Block& b) const {
    for (int a = 0; a < 3; ++a)
      if (b.lo[a] == 0 || b.hi[a] == grid_.cells[a]) return true;
    return false;
  }

  void classify(const Block& b, std::vector<Block>& leaves, long long& pruned) const {
    const Vec3 lo = grid_.vertex(b.lo[0], b.lo[1], b.lo[2]);
    const Vec3 hi = grid_.vertex(b.hi[0], b.hi[1], b.hi[2]);
    const auto range = field_.range(0.5 * (lo + hi), 0.5 * (hi - lo).norm());
    if (range) {
      if (range->second < level_ - delta_) {
        ++pruned;
        return;
      }
      if (range->first > level_ + delta_) {
        if (touches_boundary(b)) throw Error(ErrorCode::BoundaryClipping, describe_clip(lo, level_));
        ++pruned;
        return;
      }
    }
    int size[3];
    bool split = false;
    for (int a = 0; a < 3; ++a) {
      size[a] = b.hi[a] - b.lo[a];
      split = split || size[a] > opt_.leaf_cells;
    }
    if (!split) {
      leaves.push_back(b);
      return;
    }
    int mid[3];
    for (int a = 0; a < 3; ++a)
      mid[a] = size[a] > opt_.leaf_cells ? b.lo[a] + (size[a] + 1) / 2 : b.hi[a];
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const int d[3] = {dx, dy, dz};
          Block c;
          bool empty = false;
          for (int a = 0; a < 3; ++a) {
            c.lo[a] = d[a] ? mid[a] : b.lo[a];
            c.hi[a] = d[a] ? b.hi[a] : mid[a];
            empty = empty || c.lo[a] >= c.hi[a];
          }
          if (!empty) classify(c, leaves, pruned);
        }
  }

  float sample(std::uint64_t key) const {
    const std::uint64_t nx = static_cast<std::uint64_t>(grid_.cells[0]) + 1;
    const std::uint64_t ny = static_cast<std::uint64_t>(grid_.cells[1]) + 1;
    const int gi = static_cast<int>(key % nx), gj = static_cast<int>(key / nx % ny),
              gk = static_cast<int>(key / nx / ny);
    const Vec3 p = grid_.vertex(gi, gj, gk);
    const double v = field_.value(p);
    if (std::isnan(v)) throw Error(ErrorCode::InvalidArgument, "field evaluated to NaN during extraction");
    const float d = v == INFINITY || v - level_ > kSaturated ? kSaturated : static_cast<float>(v - level_);
    const bool on_boundary = gi == 0 || gj == 0 || gk == 0 || gi == grid_.cells[0] ||
                             gj == grid_.cells[1] || gk == grid_.cells[2];
    if (on_boundary && d >= 0.0f) throw Error(ErrorCode::BoundaryClipping, describe_clip(p, level_));
    return d;
  }

  std::uint64_t vertex_key(int i, int j, int k) const {
    const std::uint64_t nx = static_cast<std::uint64_t>(grid_.cells[0]) + 1;
    const std::uint64_t ny = static_cast<std::uint64_t>(grid_.cells[1]) + 1;
    return (static_cast<std::uint64_t>(k) * ny + static_cast<std::uint64_t>(j)) * nx +
           static_cast<std::uint64_t>(i);
  }

  int edge_vertex(const int gc[3], int e, const float v[8], TriMesh& mesh) {
    const CubeTables& T = tables();
    const int c0 = T.edge_c0[e], c1 = T.edge_c1[e], axis = T.edge_axis[e];
    const int gi = gc[0] + T.corner[c0][0], gj = gc[1] + T.corner[c0][1],
              gk = gc[2] + T.corner[c0][2];
    const std::uint64_t key = vertex_key(gi, gj, gk) * 3 + static_cast<std::uint64_t>(axis);
    auto [it, inserted] = edge_vertices_.try_emplace(key, static_cast<int>(mesh.vertices.size()));
    if (inserted) {
      const double a = v[c0], b = v[c1];
      double t = a / (a - b);
      t = std::clamp(t, kEdgeClamp, 1.0 - kEdgeClamp);
      Vec3 p = grid_.vertex(gi, gj, gk);
      p[axis] += t * h_;
      mesh.vertices.push_back(p);
    }
    return it->second;
  }

  void polygonize(const Leaf& leaf, TriMesh& mesh) {
    const CubeTables& T = tables();
    const Block& b = leaf.block;
    for (int k = 0; k < b.hi[2] - b.lo[2]; ++k)
      for (int j = 0; j < b.hi[1] - b.lo[1]; ++j)
        for (int i = 0; i < b.hi[0] - b.lo[0]; ++i) {
          float v[8];
          int high = 0;
          for (int c = 0; c < 8; ++c) {
            v[c] = leaf.at(i + T.corner[c][0], j + T.corner[c][1], k + T.corner[c][2]);
            high += v[c] >= 0.0f;
          }
          if (high == 0 || high == 8) continue;
          const int gc[3] = {b.lo[0] + i, b.lo[1] + j, b.lo[2] + k};
          cell(gc, v, mesh);
        }
  }

  void cell(const int gc[3], const float v[8], TriMesh& mesh) {
    const CubeTables& T = tables();
    int next[12];
    std::fill(std::begin(next), std::end(next), -1);
    for (int f = 0; f < 6; ++f) {
      bool hi[4];
      float fv[4];
      for (int k = 0; k < 4; ++k) {
        fv[k] = v[T.face_corner[f][k]];
        hi[k] = fv[k] >= 0.0f;
      }
      // Crossing on face edge k is "falling" when corner k is high and k+1 low.
      int crossings = 0;
      for (int k = 0; k < 4; ++k) crossings += hi[k] != hi[(k + 1) % 4];
      if (crossings == 0) continue;
      auto link = [&](int from_k, int to_k) { next[T.face_edge[f][from_k]] = T.face_edge[f][to_k]; };
      if (crossings == 2) {
        int falling = -1, rising = -1;
        for (int k = 0; k < 4; ++k) {
          if (hi[k] == hi[(k + 1) % 4]) continue;
          (hi[k] ? falling : rising) = k;
        }
        link(falling, rising);
        continue;
      }
      // Four crossings: alternating corners. Asymptotic decider on the
      // bilinear interpolant decides whether the high corners connect.
      const double f0 = fv[0], f1 = fv[1], f2 = fv[2], f3 = fv[3];
      const double saddle = (f0 * f2 - f1 * f3) / (f0 + f2 - f1 - f3);
      const bool high_connected = saddle >= 0.0;
      for (int k = 0; k < 4; ++k) {
        const int prev = (k + 3) % 4;
        if (high_connected && !hi[k]) link(prev, k);  // cut off low corner k
        if (!high_connected && hi[k]) link(k, prev);  // cut off high corner k
      }
    }

    bool visited[12] = {};
    std::vector<int>& loop = loop_scratch_;
    for (int e0 = 0; e0 < 12; ++e0) {
      if (next[e0] < 0 || visited[e0]) continue;
      loop.clear();
      int e = e0;
      while (!visited[e]) {
        visited[e] = true;
        loop.push_back(edge_vertex(gc, e, v, mesh));
        e = next[e];
        if (e < 0) throw Error(ErrorCode::Topology, "marching cubes produced an open polygon");
      }
      if (e != e0) throw Error(ErrorCode::Topology, "marching cubes produced a branched polygon");
      emit(loop, mesh);
    }
  }

  // Loops are traced with their normal towards the high side; triangles are
  // emitted reversed so normals face decreasing values.
  static void emit(const std::vector<int>& loop, TriMesh& mesh) {
    const int m = static_cast<int>(loop.size());
    if (m == 3) {
      mesh.triangles.push_back({loop[0], loop[2], loop[1]});
      return;
    }
    Vec3 c = Vec3::Zero();
    for (int id : loop) c += mesh.vertices[static_cast<std::size_t>(id)];
    c /= m;
    const int ci = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(c);
    for (int i = 0; i < m; ++i) mesh.triangles.push_back({ci, loop[(i + 1) % m], loop[i]});
  }

  const ScalarField& field_;
  double level_;
  const GridSpec& grid_;
  ExtractOptions opt_;
  double h_;
  double delta_;
  std::unordered_map<std::uint64_t, int> edge_vertices_;
  std::vector<int> loop_scratch_;
};

Vec3 triangle_normal(const TriMesh& m, const std::array<int, 3>& t) {
  const Vec3& a = m.vertices[static_cast<std::size_t>(t[0])];
  const Vec3& b = m.vertices[static_cast<std::size_t>(t[1])];
  const Vec3& c = m.vertices[static_cast<std::size_t>(t[2])];
  return (b - a).cross(c - a);
}

// Makes every component's normals point towards decreasing field values,
// judged by the gradient at the component's largest triangle.
void orient_components(const ScalarField& field, TriMesh& mesh) {
  if (mesh.empty()) return;
  const std::vector<int> label = component_labels(mesh);
  const int ncomp = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<std::vector<std::size_t>> by_area(static_cast<std::size_t>(ncomp));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    by_area[static_cast<std::size_t>(label[t])].push_back(t);
  for (auto& tris : by_area) {
    std::stable_sort(tris.begin(), tris.end(), [&](std::size_t a, std::size_t b) {
      return triangle_area(mesh, a) > triangle_area(mesh, b);
    });
    bool flip = false;
    for (std::size_t t : tris) {
      const auto& tri = mesh.triangles[t];
      const Vec3 centroid = (mesh.vertices[static_cast<std::size_t>(tri[0])] +
                             mesh.vertices[static_cast<std::size_t>(tri[1])] +
                             mesh.vertices[static_cast<std::size_t>(tri[2])]) / 3.0;
      Vec3 g;
      try {
        g = field.gradient(centroid);
      } catch (const TooCloseError&) {
        continue;
      }
      const double s = triangle_normal(mesh, tri).dot(g);
      if (s == 0.0 || !std::isfinite(s)) continue;
      flip = s > 0.0;
      break;
    }
    if (!flip) continue;
    for (std::size_t t : tris) std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);
  }
}

}  // namespace

double PotentialField::value(const Vec3& p) const {
  const auto v = field_.try_potential(p);
  return v ? *v : INFINITY;
}

GridSpec make_grid(const Box& box, int resolution) {
  if (resolution < kMinGridResolution)
    throw Error(ErrorCode::InvalidArgument,
                "grid resolution must be >= " + std::to_string(kMinGridResolution));
  const Vec3 ext = box.extent();
  const double h = ext.maxCoeff() / resolution;
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid box is empty");
  GridSpec g;
  Vec3 half;
  for (int a = 0; a < 3; ++a) {
    g.cells[static_cast<std::size_t>(a)] =
        std::max(kMinGridResolution, static_cast<int>(std::ceil(ext[a] / h - 1e-9)));
    half[a] = 0.5 * g.cells[static_cast<std::size_t>(a)] * h;
  }
  const Vec3 c = box.center();
  g.box = Box{c - half, c + half};
  return g;
}

GridSpec grid_for_level(const FieldEvaluator& field, double level, int resolution, double margin) {
  const double r = field.enclosing_radius(level) * (1.0 + margin);
  return make_grid(field.knot_bbox().inflated(r), resolution);
}

TriMesh extract_isosurface(const ScalarField& field, double level, const GridSpec& grid,
                           const ExtractOptions& options, ExtractStats* stats) {
  if (options.leaf_cells < 1 || options.root_cells < 1)
    throw Error(ErrorCode::InvalidArgument, "block sizes must be positive");
  Extractor ex(field, level, grid, options);
  TriMesh mesh = ex.run(stats);
  orient_components(field, mesh);
  return mesh;
}

}  // namespace knotmorse
