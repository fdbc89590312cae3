#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rfcmp/types.hpp"

namespace rfcmp {

/// Maps a point near a curved surface back onto it. Attached to generated
/// meshes so that structured refinement stays on the exact geometry.
using ProjectionRule = std::function<Vec3(const Vec3&)>;

/// An undirected mesh edge with the RWG orientation data.
///
/// `v1 < v2` always. `cell_plus` is the cell whose counterclockwise boundary
/// runs v1 -> v2; `free_plus` / `free_minus` are the vertices of the plus and
/// minus cells that are not on the edge.
struct Edge {
  int v1 = -1;
  int v2 = -1;
  int cell_plus = -1;
  int cell_minus = -1;
  int free_plus = -1;
  int free_minus = -1;
};

enum class CellRelation { kIdentical, kEdgeAdjacent, kVertexAdjacent, kDisjoint };

/// Combinatorial incidence derived from a TriangleMesh.
class MeshTopology {
 public:
  MeshTopology() = default;

  /// Number of cells attached to vertex v (NoC).
  int cells_at_vertex(int v) const { return static_cast<int>(vertex_cells_[v].size()); }
  const std::vector<int>& vertex_cells(int v) const { return vertex_cells_[v]; }
  const std::vector<int>& vertex_edges(int v) const { return vertex_edges_[v]; }

  /// Global index of the i-th vertex of cell c (VoC).
  int vertex_of_cell(int c, int i) const { return (*cells_)[c][i]; }

  /// Cells sharing an edge with c, indexed by the local edge opposite vertex i.
  const std::array<int, 3>& edge_neighbors(int c) const { return edge_neighbors_[c]; }

  /// Cells touching c only through one or more vertices, with the shared vertex.
  /// A cell appears once per shared vertex.
  const std::vector<std::pair<int, int>>& vertex_neighbors(int c) const {
    return vertex_neighbors_[c];
  }

  CellRelation relation(int a, int b) const {
    if (a == b) return CellRelation::kIdentical;
    for (int n : edge_neighbors_[a])
      if (n == b) return CellRelation::kEdgeAdjacent;
    for (const auto& [n, v] : vertex_neighbors_[a])
      if (n == b) return CellRelation::kVertexAdjacent;
    return CellRelation::kDisjoint;
  }

 private:
  friend class TriangleMesh;
  const std::vector<std::array<int, 3>>* cells_ = nullptr;
  std::vector<std::vector<int>> vertex_cells_;
  std::vector<std::vector<int>> vertex_edges_;
  std::vector<std::array<int, 3>> edge_neighbors_;
  std::vector<std::vector<std::pair<int, int>>> vertex_neighbors_;
};

struct MeshStatistics {
  Index n_vertices = 0;
  Index n_edges = 0;
  Index n_cells = 0;
  int genus = 0;
  double h_min = 0.0;
  double h_avg = 0.0;
  double h_max = 0.0;

  static std::string csv_header() { return "n_vertices,n_edges,n_cells,genus,h_min,h_avg,h_max"; }

  std::string csv_row() const {
    std::ostringstream os;
    os << std::setprecision(10) << n_vertices << ',' << n_edges << ',' << n_cells << ',' << genus
       << ',' << h_min << ',' << h_avg << ',' << h_max;
    return os.str();
  }
};

/// Closed, oriented, connected 2-manifold triangulation.
///
/// Cells are counterclockwise with respect to the outward normal. Edges are
/// derived on construction and sorted lexicographically by vertex pair.
/// Instances are immutable once built.
class TriangleMesh {
 public:
  TriangleMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> cells,
               ProjectionRule projection = {})
      : vertices_(std::move(vertices)), cells_(std::move(cells)), projection_(std::move(projection)) {
    build();
  }

  TriangleMesh(const TriangleMesh& other)
      : vertices_(other.vertices_), cells_(other.cells_), projection_(other.projection_) {
    build();
  }
  TriangleMesh& operator=(const TriangleMesh& other) {
    if (this != &other) {
      vertices_ = other.vertices_;
      cells_ = other.cells_;
      projection_ = other.projection_;
      build();
    }
    return *this;
  }
  TriangleMesh(TriangleMesh&& other) noexcept { *this = std::move(other); }
  TriangleMesh& operator=(TriangleMesh&& other) noexcept {
    vertices_ = std::move(other.vertices_);
    cells_ = std::move(other.cells_);
    projection_ = std::move(other.projection_);
    edges_ = std::move(other.edges_);
    cell_edges_ = std::move(other.cell_edges_);
    topology_ = std::move(other.topology_);
    topology_.cells_ = &cells_;
    return *this;
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const MeshTopology& topology() const { return topology_; }
  const ProjectionRule& projection() const { return projection_; }

  Index n_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index n_edges() const { return static_cast<Index>(edges_.size()); }
  Index n_cells() const { return static_cast<Index>(cells_.size()); }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  const Vec3& cell_vertex(int c, int i) const { return vertices_[cells_[c][i]]; }

  /// Edge index of the local edge of cell c opposite its i-th vertex.
  int cell_edge(int c, int i) const { return cell_edges_[c][i]; }

  /// +1 when c is the plus cell of its local edge i, -1 otherwise.
  int cell_edge_sign(int c, int i) const { return edges_[cell_edges_[c][i]].cell_plus == c ? 1 : -1; }

  Vec3 cell_area_vector(int c) const {
    const Vec3& a = cell_vertex(c, 0);
    return 0.5 * (cell_vertex(c, 1) - a).cross(cell_vertex(c, 2) - a);
  }
  double cell_area(int c) const { return cell_area_vector(c).norm(); }
  Vec3 cell_normal(int c) const { return cell_area_vector(c).normalized(); }
  Vec3 cell_centroid(int c) const {
    return (cell_vertex(c, 0) + cell_vertex(c, 1) + cell_vertex(c, 2)) / 3.0;
  }

  double edge_length(int e) const { return (vertices_[edges_[e].v2] - vertices_[edges_[e].v1]).norm(); }

  long euler_characteristic() const { return static_cast<long>(n_vertices() - n_edges() + n_cells()); }

  double surface_area() const {
    double a = 0.0;
    for (int c = 0; c < n_cells(); ++c) a += cell_area(c);
    return a;
  }

  /// Largest cell diameter (longest edge).
  double max_edge_length() const {
    double h = 0.0;
    for (int e = 0; e < n_edges(); ++e) h = std::max(h, edge_length(e));
    return h;
  }

 private:
  void build();

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> cells_;
  ProjectionRule projection_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  MeshTopology topology_;
};

inline void TriangleMesh::build() {
  const int nv = static_cast<int>(vertices_.size());
  const int nc = static_cast<int>(cells_.size());
  if (nv == 0 || nc == 0) throw MeshError("mesh has no vertices or no cells");

  for (int c = 0; c < nc; ++c) {
    const auto& t = cells_[c];
    for (int i = 0; i < 3; ++i)
      if (t[i] < 0 || t[i] >= nv)
        throw MeshError("cell " + std::to_string(c) + " references vertex out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw MeshError("cell " + std::to_string(c) + " repeats a vertex");
  }

  // Undirected edge -> (cell, local index opposite, forward?) incidences.
  struct Incidence {
    int cell;
    int local;
    bool forward;
  };
  std::map<std::pair<int, int>, std::vector<Incidence>> incidences;
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < 3; ++i) {
      const int a = cells_[c][(i + 1) % 3];
      const int b = cells_[c][(i + 2) % 3];
      incidences[{std::min(a, b), std::max(a, b)}].push_back({c, i, a < b});
    }
  }

  edges_.clear();
  edges_.reserve(incidences.size());
  cell_edges_.assign(nc, {-1, -1, -1});
  for (const auto& [key, list] : incidences) {
    const int index = static_cast<int>(edges_.size());
    if (list.size() != 2)
      throw MeshError("non-manifold edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                      ") has " + std::to_string(list.size()) + " incident cells");
    if (list[0].forward == list[1].forward)
      throw MeshError("inconsistent orientation at edge " + std::to_string(index) + " (" +
                      std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    const Incidence& plus = list[0].forward ? list[0] : list[1];
    const Incidence& minus = list[0].forward ? list[1] : list[0];
    Edge e;
    e.v1 = key.first;
    e.v2 = key.second;
    e.cell_plus = plus.cell;
    e.cell_minus = minus.cell;
    e.free_plus = cells_[plus.cell][plus.local];
    e.free_minus = cells_[minus.cell][minus.local];
    edges_.push_back(e);
    cell_edges_[plus.cell][plus.local] = index;
    cell_edges_[minus.cell][minus.local] = index;
  }

  topology_ = MeshTopology{};
  topology_.cells_ = &cells_;
  topology_.vertex_cells_.assign(nv, {});
  topology_.vertex_edges_.assign(nv, {});
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < 3; ++i) topology_.vertex_cells_[cells_[c][i]].push_back(c);
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    topology_.vertex_edges_[edges_[e].v1].push_back(e);
    topology_.vertex_edges_[edges_[e].v2].push_back(e);
  }
  for (int v = 0; v < nv; ++v)
    if (topology_.vertex_cells_[v].empty())
      throw MeshError("vertex " + std::to_string(v) + " is not used by any cell");

  topology_.edge_neighbors_.assign(nc, {-1, -1, -1});
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < 3; ++i) {
      const Edge& e = edges_[cell_edges_[c][i]];
      topology_.edge_neighbors_[c][i] = e.cell_plus == c ? e.cell_minus : e.cell_plus;
    }

  topology_.vertex_neighbors_.assign(nc, {});
  for (int c = 0; c < nc; ++c) {
    const auto& nb = topology_.edge_neighbors_[c];
    for (int i = 0; i < 3; ++i) {
      const int v = cells_[c][i];
      for (int other : topology_.vertex_cells_[v]) {
        if (other == c || other == nb[0] || other == nb[1] || other == nb[2]) continue;
        topology_.vertex_neighbors_[c].emplace_back(other, v);
      }
    }
  }

  // Connectivity through shared edges.
  std::vector<char> seen(nc, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    for (int n : topology_.edge_neighbors_[c])
      if (!seen[n]) {
        seen[n] = 1;
        ++reached;
        stack.push_back(n);
      }
  }
  if (reached != nc) throw MeshError("mesh is not connected");

  const long chi = euler_characteristic();
  if (chi % 2 != 0) throw MeshError("odd Euler characteristic " + std::to_string(chi));
  if (chi > 2) throw MeshError("Euler characteristic " + std::to_string(chi) + " exceeds 2");
}

/// g = (2 - chi) / 2.
inline int genus(const TriangleMesh& mesh) {
  const long chi = mesh.euler_characteristic();
  if (chi % 2 != 0) throw MeshError("odd Euler characteristic " + std::to_string(chi));
  return static_cast<int>((2 - chi) / 2);
}

inline MeshStatistics mesh_statistics(const TriangleMesh& mesh) {
  MeshStatistics s;
  s.n_vertices = mesh.n_vertices();
  s.n_edges = mesh.n_edges();
  s.n_cells = mesh.n_cells();
  s.genus = genus(mesh);
  s.h_min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const double l = mesh.edge_length(e);
    s.h_min = std::min(s.h_min, l);
    s.h_max = std::max(s.h_max, l);
    sum += l;
  }
  s.h_avg = sum / static_cast<double>(mesh.n_edges());
  return s;
}

/// Average edge length h.
inline double average_edge_length(const TriangleMesh& mesh) { return mesh_statistics(mesh).h_avg; }

/// FNV-1a over vertex coordinates and cell indices.
inline std::uint64_t mesh_hash(const TriangleMesh& mesh) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Vec3& v : mesh.vertices()) mix(v.data(), 3 * sizeof(double));
  for (const auto& c : mesh.cells()) mix(c.data(), 3 * sizeof(int));
  return h;
}

/// Splits every triangle into four through its edge midpoints. New vertices are
/// passed through the mesh's projection rule when one is attached.
inline TriangleMesh refine_structured(const TriangleMesh& mesh) {
  std::vector<Vec3> vertices = mesh.vertices();
  std::vector<int> midpoint(mesh.n_edges(), -1);
  const auto& proj = mesh.projection();
  for (int e = 0; e < mesh.n_edges(); ++e) {
    Vec3 m = 0.5 * (mesh.vertex(mesh.edges()[e].v1) + mesh.vertex(mesh.edges()[e].v2));
    if (proj) m = proj(m);
    midpoint[e] = static_cast<int>(vertices.size());
    vertices.push_back(m);
  }
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cells()[c];
    // m_i is the midpoint of the edge opposite vertex i.
    const int m0 = midpoint[mesh.cell_edge(c, 0)];
    const int m1 = midpoint[mesh.cell_edge(c, 1)];
    const int m2 = midpoint[mesh.cell_edge(c, 2)];
    cells.push_back({t[0], m2, m1});
    cells.push_back({m2, t[1], m0});
    cells.push_back({m1, m0, t[2]});
    cells.push_back({m0, m1, m2});
  }
  return TriangleMesh(std::move(vertices), std::move(cells), proj);
}

/// Icosahedron refined `subdivisions` times, vertices on the sphere of the given radius.
inline TriangleMesh make_sphere(double radius, int subdivisions) {
  if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
  if (subdivisions < 0) throw ConfigError("subdivisions must be >= 0");
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& p : v) p = radius * p.normalized();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& t : f) {
    const Vec3 n = (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]);
    if (n.dot(v[t[0]] + v[t[1]] + v[t[2]]) < 0.0) std::swap(t[1], t[2]);
  }
  ProjectionRule rule = [radius](const Vec3& p) -> Vec3 { return radius * p.normalized(); };
  TriangleMesh mesh(std::move(v), std::move(f), rule);
  for (int s = 0; s < subdivisions; ++s) mesh = refine_structured(mesh);
  return mesh;
}

/// Structured torus around the z axis; each (u, v) grid quad is split into two cells.
inline TriangleMesh make_torus(double major_radius, double minor_radius, int n_major, int n_minor) {
  if (!(minor_radius > 0.0) || !(minor_radius < major_radius))
    throw ConfigError("torus radii must satisfy 0 < minor < major");
  if (n_major < 3 || n_minor < 3) throw ConfigError("torus resolution must be at least 3x3");
  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(n_major) * n_minor);
  for (int i = 0; i < n_major; ++i) {
    const double u = 2.0 * kPi * i / n_major;
    for (int j = 0; j < n_minor; ++j) {
      const double w = 2.0 * kPi * j / n_minor;
      const double rho = major_radius + minor_radius * std::cos(w);
      vertices.emplace_back(rho * std::cos(u), rho * std::sin(u), minor_radius * std::sin(w));
    }
  }
  auto id = [n_major, n_minor](int i, int j) { return (i % n_major) * n_minor + (j % n_minor); };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * static_cast<std::size_t>(n_major) * n_minor);
  for (int i = 0; i < n_major; ++i)
    for (int j = 0; j < n_minor; ++j) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      cells.push_back({a, b, c});
      cells.push_back({a, c, d});
    }
  ProjectionRule rule = [major_radius, minor_radius](const Vec3& p) -> Vec3 {
    const double u = std::atan2(p.y(), p.x());
    const Vec3 center(major_radius * std::cos(u), major_radius * std::sin(u), 0.0);
    return center + minor_radius * (p - center).normalized();
  };
  return TriangleMesh(std::move(vertices), std::move(cells), rule);
}

/// Reads an ASCII OFF file with triangular faces.
inline TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");

  // Tokenize everything outside comments.
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next_token = [&](const char* what) -> const std::string& {
    if (pos >= tokens.size()) throw MeshError("OFF parse error: unexpected end of file reading " + std::string(what));
    return tokens[pos++];
  };
  auto to_long = [](const std::string& s, const char* what) {
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw MeshError("OFF parse error: bad " + std::string(what) + " '" + s + "'");
    return value;
  };
  auto to_double = [](const std::string& s) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw MeshError("OFF parse error: bad coordinate '" + s + "'");
    return value;
  };

  std::string head = next_token("header");
  if (head != "OFF") {
    // Header and counts may share a line ("OFF4 ..." is not supported).
    if (head.rfind("OFF", 0) != 0) throw MeshError("OFF parse error: missing OFF header");
    throw MeshError("OFF parse error: unsupported header '" + head + "'");
  }
  const long nv = to_long(next_token("vertex count"), "vertex count");
  const long nf = to_long(next_token("face count"), "face count");
  to_long(next_token("edge count"), "edge count");
  if (nv <= 0 || nf <= 0) throw MeshError("OFF parse error: empty mesh");

  std::vector<Vec3> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices)
    for (int k = 0; k < 3; ++k) p[k] = to_double(next_token("vertex"));
  std::vector<std::array<int, 3>> cells(static_cast<std::size_t>(nf));
  for (auto& t : cells) {
    const long n = to_long(next_token("face size"), "face size");
    if (n != 3) throw MeshError("OFF parse error: only triangular faces are supported");
    for (int k = 0; k < 3; ++k) {
      const long idx = to_long(next_token("face index"), "face index");
      if (idx < 0 || idx >= nv) throw MeshError("OFF parse error: face index out of range");
      t[k] = static_cast<int>(idx);
    }
  }
  return TriangleMesh(std::move(vertices), std::move(cells));
}

inline void write_off(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path + "'");
  out << "OFF\n" << mesh.n_vertices() << ' ' << mesh.n_cells() << " 0\n";
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  if (!out) throw IoError("failed writing mesh file '" + path + "'");
}

}  // namespace rfcmp
