#include "mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "error.hpp"
#include "marching.hpp"

namespace knotmorse {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct EdgeUse {
  int count = 0;
  int first_tri = -1;
  int second_tri = -1;
  int from = -1;  // direction in the first triangle
};

std::unordered_map<std::uint64_t, EdgeUse> edge_uses(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, EdgeUse> uses;
  uses.reserve(mesh.triangles.size() * 2);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[static_cast<std::size_t>(k)], b = tri[static_cast<std::size_t>((k + 1) % 3)];
      EdgeUse& u = uses[edge_key(a, b)];
      if (u.count == 0) {
        u.first_tri = static_cast<int>(t);
        u.from = a;
      } else if (u.count == 1) {
        u.second_tri = static_cast<int>(t);
        if (u.from == a) {
          std::ostringstream os;
          os << "inconsistent winding on edge (" << a << ", " << b << ") shared by triangles "
             << u.first_tri << " and " << t;
          throw Error(ErrorCode::NonManifold, os.str());
        }
      }
      ++u.count;
    }
  }
  return uses;
}

}  // namespace

std::vector<int> component_labels(const TriMesh& mesh) {
  const std::size_t nt = mesh.triangles.size();
  DisjointSets sets(nt);
  std::unordered_map<std::uint64_t, int> first;
  first.reserve(nt * 2);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const auto key = edge_key(tri[static_cast<std::size_t>(k)], tri[static_cast<std::size_t>((k + 1) % 3)]);
      auto [it, inserted] = first.try_emplace(key, static_cast<int>(t));
      if (!inserted) sets.unite(static_cast<std::size_t>(it->second), t);
    }
  }
  std::vector<int> label(nt, -1);
  std::unordered_map<std::size_t, int> root_label;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t r = sets.find(t);
    auto [it, inserted] = root_label.try_emplace(r, static_cast<int>(root_label.size()));
    label[t] = it->second;
  }
  return label;
}

TopologyReport topology(const TriMesh& mesh) {
  TopologyReport report;
  if (mesh.triangles.empty()) return report;
  const auto uses = edge_uses(mesh);
  for (const auto& [key, u] : uses) {
    if (u.count != 2) {
      std::ostringstream os;
      os << "non-manifold edge (" << (key >> 32) << ", " << (key & 0xffffffffULL) << ") has "
         << u.count << " incident triangle" << (u.count == 1 ? "" : "s");
      throw Error(ErrorCode::NonManifold, os.str());
    }
  }
  const std::vector<int> label = component_labels(mesh);
  const int ncomp = *std::max_element(label.begin(), label.end()) + 1;
  report.components = ncomp;
  report.per_component.resize(static_cast<std::size_t>(ncomp));
  std::vector<std::unordered_set<int>> verts(static_cast<std::size_t>(ncomp));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    auto& c = report.per_component[static_cast<std::size_t>(label[t])];
    ++c.faces;
    for (int v : mesh.triangles[t]) verts[static_cast<std::size_t>(label[t])].insert(v);
  }
  for (const auto& [key, u] : uses) {
    (void)key;
    ++report.per_component[static_cast<std::size_t>(label[static_cast<std::size_t>(u.first_tri)])].edges;
  }
  for (int c = 0; c < ncomp; ++c) {
    auto& comp = report.per_component[static_cast<std::size_t>(c)];
    comp.vertices = static_cast<int>(verts[static_cast<std::size_t>(c)].size());
    comp.euler_char = comp.vertices - comp.edges + comp.faces;
    if (comp.euler_char % 2 != 0 || comp.euler_char > 2) {
      throw Error(ErrorCode::Topology, "component " + std::to_string(c) +
                                           " has Euler characteristic " +
                                           std::to_string(comp.euler_char) +
                                           ", impossible for a closed orientable surface");
    }
    comp.genus = (2 - comp.euler_char) / 2;
    report.total_genus += comp.genus;
  }
  return report;
}

double triangle_area(const TriMesh& mesh, std::size_t tri) {
  const auto& t = mesh.triangles[tri];
  const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
  const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
  const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
  return 0.5 * (b - a).cross(c - a).norm();
}

std::vector<double> flux(const ScalarField& field, const TriMesh& mesh) {
  if (mesh.triangles.empty()) return {};
  const std::vector<int> label = component_labels(mesh);
  const int ncomp = *std::max_element(label.begin(), label.end()) + 1;
  std::vector<double> out(static_cast<std::size_t>(ncomp), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const Vec3 area = 0.5 * (b - a).cross(c - a);
    Vec3 g;
    try {
      g = field.gradient((a + b + c) / 3.0);
    } catch (const TooCloseError&) {
      // A coarse facet can cut across the exclusion tube even though its
      // corners sit on the level set; fall back to the corner average.
      try {
        g = (field.gradient(a) + field.gradient(b) + field.gradient(c)) / 3.0;
      } catch (const TooCloseError& e) {
        throw Error(ErrorCode::Topology,
                    std::string("surface mesh passes through the exclusion radius around the knot (") +
                        e.what() + "); increase the surface resolution");
      }
    }
    out[static_cast<std::size_t>(label[t])] -= g.dot(area);
  }
  return out;
}

void attach_flux(TopologyReport& report, const std::vector<double>& fluxes) {
  for (std::size_t i = 0; i < report.per_component.size() && i < fluxes.size(); ++i)
    report.per_component[i].flux = fluxes[i];
}

void export_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  if (mesh.empty()) throw Error(ErrorCode::InvalidArgument, "refusing to export an empty mesh");
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    char buf[128];
    std::snprintf(buf, sizeof buf, "# level %.17g\n", mesh.level);
    os << buf;
    for (const Vec3& v : mesh.vertices) {
      std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
      os << buf;
    }
    for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!os) throw Error(ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

TriMesh import_obj(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      ls >> v.x() >> v.y() >> v.z();
      if (!ls) throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> t{};
      for (int& i : t) {
        std::string tok;
        ls >> tok;
        i = std::atoi(tok.c_str()) - 1;  // ignores any "/vt/vn" suffix
        if (i < 0) throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(lineno) + ": bad face");
      }
      mesh.triangles.push_back(t);
    } else if (tag == "#" && line.rfind("# level ", 0) == 0) {
      mesh.level = std::stod(line.substr(8));
    }
  }
  return mesh;
}

}  // namespace knotmorse
