#pragma once

#include <string>
#include <vector>

#include "rfcmp/mesh.hpp"
#include "rfcmp/quadrature.hpp"

namespace rfcmp {

enum class BasisFamily { kRwg, kNodal, kPatch };

struct BasisDescriptor {
  BasisFamily family;
  Index count;
  std::string normalization;
};

inline BasisDescriptor describe_basis(const TriangleMesh& mesh, BasisFamily family) {
  switch (family) {
    case BasisFamily::kRwg:
      return {family, mesh.n_edges(), "unnormalized RWG, divergence +-1/A on the plus/minus cell"};
    case BasisFamily::kNodal:
      return {family, mesh.n_vertices(), "piecewise-linear hat, 1 at its vertex"};
    case BasisFamily::kPatch:
      return {family, mesh.n_cells(), "1/A on its cell"};
  }
  throw ConfigError("unknown basis family");
}

/// Value of RWG function `edge` at point r inside cell `cell` (zero elsewhere).
inline Vec3 rwg_value(const TriangleMesh& mesh, int edge, int cell, const Vec3& r) {
  const Edge& e = mesh.edges()[edge];
  if (cell == e.cell_plus) return (r - mesh.vertex(e.free_plus)) / (2.0 * mesh.cell_area(cell));
  if (cell == e.cell_minus) return (mesh.vertex(e.free_minus) - r) / (2.0 * mesh.cell_area(cell));
  return Vec3::Zero();
}

inline double rwg_divergence(const TriangleMesh& mesh, int edge, int cell) {
  const Edge& e = mesh.edges()[edge];
  if (cell == e.cell_plus) return 1.0 / mesh.cell_area(cell);
  if (cell == e.cell_minus) return -1.0 / mesh.cell_area(cell);
  return 0.0;
}

/// Surface curl n x grad(lambda) of the hat function of the i-th vertex of cell c.
inline Vec3 nodal_curl(const TriangleMesh& mesh, int c, int i) {
  const double area = mesh.cell_area(c);
  if (!(area > 0.0)) throw MeshError("degenerate cell " + std::to_string(c));
  return (mesh.cell_vertex(c, (i + 1) % 3) - mesh.cell_vertex(c, (i + 2) % 3)) / (2.0 * area);
}

namespace detail {
inline SparseRealMatrix from_triplets(Index rows, Index cols, const std::vector<Eigen::Triplet<double>>& t) {
  SparseRealMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}
}  // namespace detail

/// [G_ff]_mn = int f_m . f_n over the shared cells.
inline SparseRealMatrix gram_ff(const TriangleMesh& mesh, const QuadratureRule& rule = triangle_rule_7()) {
  if (rule.degree < 2) throw ConfigError("gram_ff needs a rule of degree >= 2");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(9 * mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double area = mesh.cell_area(c);
    const Vec3 &a = mesh.cell_vertex(c, 0), &b = mesh.cell_vertex(c, 1), &d = mesh.cell_vertex(c, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Vec3& pi = mesh.cell_vertex(c, i);
        const Vec3& pj = mesh.cell_vertex(c, j);
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Vec3 r = rule.map(q, a, b, d);
          s += rule.weights[q] * (r - pi).dot(r - pj);
        }
        const double sign = mesh.cell_edge_sign(c, i) * mesh.cell_edge_sign(c, j);
        t.emplace_back(mesh.cell_edge(c, i), mesh.cell_edge(c, j), sign * s / (4.0 * area));
      }
  }
  return detail::from_triplets(mesh.n_edges(), mesh.n_edges(), t);
}

/// [G_ll]_mn = int lambda_m lambda_n.
inline SparseRealMatrix gram_lambda(const TriangleMesh& mesh, const QuadratureRule& rule = triangle_rule_7()) {
  if (rule.degree < 2) throw ConfigError("gram_lambda needs a rule of degree >= 2");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(9 * mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double area = mesh.cell_area(c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * rule.points[q][i] * rule.points[q][j];
        t.emplace_back(mesh.cells()[c][i], mesh.cells()[c][j], s * area);
      }
  }
  return detail::from_triplets(mesh.n_vertices(), mesh.n_vertices(), t);
}

/// Diagonal patch Gram, entries 1/A.
inline SparseRealMatrix gram_pp(const TriangleMesh& mesh) {
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double area = mesh.cell_area(c);
    if (!(area > 0.0)) throw MeshError("degenerate cell " + std::to_string(c));
    t.emplace_back(c, c, 1.0 / area);
  }
  return detail::from_triplets(mesh.n_cells(), mesh.n_cells(), t);
}

/// Mixed Gram between dual hat functions and patches, from vertex valences only.
inline SparseRealMatrix gram_dual_lambda_p(const TriangleMesh& mesh) {
  const MeshTopology& topo = mesh.topology();
  auto inv_noc = [&](int v) { return 1.0 / topo.cells_at_vertex(v); };
  constexpr double scale = 2.0 / 18.0;
  std::vector<Eigen::Triplet<double>> t;
  for (int m = 0; m < mesh.n_cells(); ++m) {
    double diag = 4.5;
    for (int i = 0; i < 3; ++i) diag += inv_noc(topo.vertex_of_cell(m, i));
    t.emplace_back(m, m, scale * diag);
    for (int i = 0; i < 3; ++i) {
      const Edge& e = mesh.edges()[mesh.cell_edge(m, i)];
      t.emplace_back(m, topo.edge_neighbors(m)[i], scale * (0.5 + inv_noc(e.v1) + inv_noc(e.v2)));
    }
    for (const auto& [n, v] : topo.vertex_neighbors(m)) t.emplace_back(m, n, scale * inv_noc(v));
  }
  return detail::from_triplets(mesh.n_cells(), mesh.n_cells(), t);
}

/// Piecewise-linear stiffness matrix (cotangent Laplacian).
inline SparseRealMatrix laplace_beltrami(const TriangleMesh& mesh) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(9 * mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double area = mesh.cell_area(c);
    if (!(area > 1e-300)) throw MeshError("degenerate (zero-area) cell " + std::to_string(c));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        t.emplace_back(mesh.cells()[c][i], mesh.cells()[c][j],
                       area * nodal_curl(mesh, c, i).dot(nodal_curl(mesh, c, j)));
  }
  return detail::from_triplets(mesh.n_vertices(), mesh.n_vertices(), t);
}

/// Delta + (G_ll 1)(G_ll 1)^T. Dense because of the rank-one term.
inline RealMatrix deflected_laplacian(const TriangleMesh& mesh) {
  const RealVector g1 = gram_lambda(mesh) * RealVector::Ones(mesh.n_vertices());
  RealMatrix d = RealMatrix(laplace_beltrami(mesh));
  d.noalias() += g1 * g1.transpose();
  return d;
}

}  // namespace rfcmp
