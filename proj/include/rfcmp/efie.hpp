#pragma once

#include <cmath>
#include <vector>

#include "rfcmp/discretization.hpp"
#include "rfcmp/potentials.hpp"

namespace rfcmp {

/// Wavenumber and background medium. Currents are normalized by eta.
struct ScatteringScenario {
  double frequency_hz = 0.0;
  double epsilon_r = 1.0;
  double mu_r = 1.0;

  double wavenumber() const { return 2.0 * kPi * frequency_hz * std::sqrt(epsilon_r * mu_r) / kSpeedOfLight; }
  double impedance() const { return 376.730313668 * std::sqrt(mu_r / epsilon_r); }

  static ScatteringScenario from_frequency(double f) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw ConfigError("frequency must be finite and >= 0");
    ScatteringScenario s;
    s.frequency_hz = f;
    return s;
  }
};

/// Frequency-independent part of the assembly: the 1/(4 pi R) blocks.
///   ta0 = T_A^0 (edges x edges), s = int int 1/(4 pi R) per cell pair.
struct StaticEfieCache {
  RealMatrix ta0;
  RealMatrix s;
};

namespace detail {

inline double cell_diameter(const TriangleMesh& mesh, int c) {
  const Vec3 &a = mesh.cell_vertex(c, 0), &b = mesh.cell_vertex(c, 1), &d = mesh.cell_vertex(c, 2);
  return std::max({(b - a).norm(), (d - b).norm(), (a - d).norm()});
}

inline void check_cells(const TriangleMesh& mesh) {
  for (int c = 0; c < mesh.n_cells(); ++c)
    if (!(mesh.cell_area(c) > 0.0)) throw MeshError("degenerate (zero-area) cell " + std::to_string(c));
}

// Adds a cell-pair 3x3 block into an edge-by-edge matrix, and its transpose
// for the mirrored pair.
template <typename Matrix, typename Block>
void scatter_pair(const TriangleMesh& mesh, int a, int b, const Block& m, Matrix& out) {
  const double scale = 1.0 / (4.0 * mesh.cell_area(a) * mesh.cell_area(b));
  for (int i = 0; i < 3; ++i) {
    const int ei = mesh.cell_edge(a, i);
    const double si = mesh.cell_edge_sign(a, i) * scale;
    for (int j = 0; j < 3; ++j) {
      const int ej = mesh.cell_edge(b, j);
      const auto v = si * mesh.cell_edge_sign(b, j) * m(i, j);
      out(ei, ej) += v;
      if (a != b) out(ej, ei) += v;
    }
  }
}

}  // namespace detail

inline StaticEfieCache build_static_cache(const TriangleMesh& mesh, const StaticQuadrature& quad = {}) {
  if (quad.touching.size() == 0 || quad.near.degree < 6 || quad.mid.degree < 4 || quad.far.degree < 2)
    throw ConfigError("static EFIE quadrature has insufficient degree");
  detail::check_cells(mesh);
  const int nc = static_cast<int>(mesh.n_cells());
  StaticEfieCache cache;
  cache.ta0 = RealMatrix::Zero(mesh.n_edges(), mesh.n_edges());
  cache.s = RealMatrix::Zero(nc, nc);
  std::vector<Vec3> centroid(nc);
  std::vector<double> diam(nc);
  for (int c = 0; c < nc; ++c) {
    centroid[c] = mesh.cell_centroid(c);
    diam[c] = detail::cell_diameter(mesh, c);
  }
  for (int a = 0; a < nc; ++a) {
    for (int b = a; b < nc; ++b) {
      const double ratio = (centroid[a] - centroid[b]).norm() / std::max(diam[a], diam[b]);
      const QuadratureRule& rule =
          mesh.topology().relation(a, b) != CellRelation::kDisjoint
              ? quad.touching
              : (ratio < quad.near_ratio ? quad.near : (ratio < quad.far_ratio ? quad.mid : quad.far));
      PairIntegrals p = static_pair_integrals(mesh, a, b, rule);
      if (a == b) p.m = 0.5 * (p.m + p.m.transpose()).eval();
      cache.s(a, b) = p.s;
      cache.s(b, a) = p.s;
      detail::scatter_pair(mesh, a, b, p.m, cache.ta0);
    }
  }
  return cache;
}

/// Frequency-dependent blocks: T_A^k (edges x edges) and the patch matrix
/// V^k with [V]_ab = int int G / (A_a A_b).
struct DynamicBlocks {
  double k = 0.0;
  ComplexMatrix t_a;
  ComplexMatrix v;
};

inline DynamicBlocks assemble_dynamic(const TriangleMesh& mesh, double k, const StaticEfieCache& cache,
                                      const QuadratureRule& rule) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("wavenumber must be finite and >= 0");
  const int nc = static_cast<int>(mesh.n_cells());
  DynamicBlocks out;
  out.k = k;
  out.t_a = cache.ta0.cast<Complex>();
  ComplexMatrix s = cache.s.cast<Complex>();
  if (k > 0.0) {
    std::vector<std::vector<Vec3>> pts(nc);
    std::vector<std::vector<double>> wts(nc);
    for (int c = 0; c < nc; ++c) {
      const double area = mesh.cell_area(c);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        pts[c].push_back(rule.map(q, mesh.cell_vertex(c, 0), mesh.cell_vertex(c, 1), mesh.cell_vertex(c, 2)));
        wts[c].push_back(rule.weights[q] * area);
      }
    }
    for (int a = 0; a < nc; ++a) {
      const Vec3 p[3] = {mesh.cell_vertex(a, 0), mesh.cell_vertex(a, 1), mesh.cell_vertex(a, 2)};
      for (int b = a; b < nc; ++b) {
        const Vec3 q[3] = {mesh.cell_vertex(b, 0), mesh.cell_vertex(b, 1), mesh.cell_vertex(b, 2)};
        DynamicPairIntegrals d = dynamic_pair_integrals(pts[a], wts[a], p, pts[b], wts[b], q, k);
        if (a == b) d.m = (0.5 * (d.m + d.m.transpose())).eval();
        s(a, b) += d.s;
        if (a != b) s(b, a) += d.s;
        detail::scatter_pair(mesh, a, b, d.m, out.t_a);
      }
    }
  }
  out.v.resize(nc, nc);
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) out.v(a, b) = s(a, b) / (mesh.cell_area(a) * mesh.cell_area(b));
  return out;
}

// The 7-point rule keeps the smooth remainder near 1e-9 relative while k h < 0.1;
// electrically larger cells get a 36-point rule.
inline DynamicBlocks assemble_dynamic(const TriangleMesh& mesh, double k, const StaticEfieCache& cache) {
  double h = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int i = 0; i < 3; ++i) h = std::max(h, (mesh.cell_vertex(c, i) - mesh.cell_vertex(c, (i + 1) % 3)).norm());
  return assemble_dynamic(mesh, k, cache, k * h < 0.1 ? triangle_rule_7() : triangle_rule_conical(6));
}

inline ComplexMatrix assemble_TA(const TriangleMesh& mesh, double k, const StaticEfieCache& cache) {
  return assemble_dynamic(mesh, k, cache).t_a;
}

/// [T_Phi]_mn accumulated pair by pair from divergences and the patch kernel.
inline ComplexMatrix assemble_TPhi(const TriangleMesh& mesh, const DynamicBlocks& blocks) {
  const int nc = static_cast<int>(mesh.n_cells());
  ComplexMatrix t = ComplexMatrix::Zero(mesh.n_edges(), mesh.n_edges());
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      const Complex g = blocks.v(a, b);
      for (int i = 0; i < 3; ++i) {
        const int ei = mesh.cell_edge(a, i);
        const int si = mesh.cell_edge_sign(a, i);
        for (int j = 0; j < 3; ++j) t(ei, mesh.cell_edge(b, j)) += static_cast<double>(si * mesh.cell_edge_sign(b, j)) * g;
      }
    }
  return t;
}

inline ComplexMatrix assemble_TPhi(const TriangleMesh& mesh, double k, const StaticEfieCache& cache) {
  return assemble_TPhi(mesh, assemble_dynamic(mesh, k, cache));
}

/// T = ik T_A + T_Phi/(ik). Not usable in the static limit.
inline ComplexMatrix assemble_T(const TriangleMesh& mesh, const DynamicBlocks& blocks) {
  if (!(blocks.k > 0.0)) throw ConfigError("assemble_T needs k > 0; use the static blocks at k = 0");
  const Complex ik(0.0, blocks.k);
  ComplexMatrix t = assemble_TPhi(mesh, blocks) / ik;
  t.noalias() += ik * blocks.t_a;
  return t;
}

inline ComplexMatrix assemble_T(const TriangleMesh& mesh, double k, const StaticEfieCache& cache) {
  if (!(k > 0.0)) throw ConfigError("assemble_T needs k > 0; use the static blocks at k = 0");
  return assemble_T(mesh, assemble_dynamic(mesh, k, cache));
}

/// Single-layer patch matrix, [V]_ab = int int 1/(4 pi R) / (A_a A_b).
inline RealMatrix assemble_V(const TriangleMesh& mesh, const StaticEfieCache& cache) {
  RealMatrix v = cache.s;
  for (int a = 0; a < mesh.n_cells(); ++a)
    for (int b = 0; b < mesh.n_cells(); ++b) v(a, b) /= mesh.cell_area(a) * mesh.cell_area(b);
  return v;
}

/// Hypersingular matrix through the curl-curl form; the surface curls of the
/// hat functions are constant per cell.
inline RealMatrix assemble_W(const TriangleMesh& mesh, const StaticEfieCache& cache) {
  const Index nv = mesh.n_vertices(), nc = mesh.n_cells();
  RealMatrix w = RealMatrix::Zero(nv, nv);
  for (int x = 0; x < 3; ++x) {
    RealMatrix curl = RealMatrix::Zero(nv, nc);
    for (int c = 0; c < nc; ++c)
      for (int i = 0; i < 3; ++i) curl(mesh.cells()[c][i], c) += nodal_curl(mesh, c, i)[x];
    const RealMatrix cs = curl * cache.s;
    w.noalias() += cs * curl.transpose();
  }
  return 0.5 * (w + w.transpose());
}

/// W + (G_ll 1)(G_ll 1)^T.
inline RealMatrix deflected_W(const TriangleMesh& mesh, const RealMatrix& w) {
  const RealVector g1 = gram_lambda(mesh) * RealVector::Ones(mesh.n_vertices());
  RealMatrix out = w;
  out.noalias() += g1 * g1.transpose();
  return out;
}

/// Right-hand side split as e = general + Sigma * star. Keeping the static,
/// curl-free part of a plane wave in cell form means its zero loop and
/// harmonic projections are exact.
struct Excitation {
  ComplexVector general;
  ComplexVector star;

  ComplexVector full(const TriangleMesh& mesh) const {
    ComplexVector e = general;
    for (int n = 0; n < mesh.n_edges(); ++n) {
      const Edge& ed = mesh.edges()[n];
      e[n] += star[ed.cell_plus] - star[ed.cell_minus];
    }
    return e;
  }
};

/// e_n = int f_n . E^i, E^i = amplitude * pol * exp(ik d.r).
inline Excitation excitation_planewave(const TriangleMesh& mesh, const Vec3& direction, const Vec3& polarization,
                                       double k, double amplitude,
                                       const QuadratureRule& rule = triangle_rule_conical(8)) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw ConfigError("propagation direction must be a unit vector");
  if (std::abs(polarization.norm() - 1.0) > 1e-9) throw ConfigError("polarization must be a unit vector");
  if (std::abs(direction.dot(polarization)) > 1e-9)
    throw ConfigError("polarization must be orthogonal to the propagation direction");
  if (!(k >= 0.0)) throw ConfigError("wavenumber must be >= 0");
  Excitation ex;
  ex.general = ComplexVector::Zero(mesh.n_edges());
  ex.star = ComplexVector::Zero(mesh.n_cells());
  const Vec3 e0 = amplitude * polarization;
  // int f_n . E0 = -(E0 . centroid) summed with the star signs
  for (int c = 0; c < mesh.n_cells(); ++c) ex.star[c] = -e0.dot(mesh.cell_centroid(c));
  if (k == 0.0 || amplitude == 0.0) return ex;
  // f_n = +-(r - free)/(2A), so the area cancels against the rule scaling
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec3 &a = mesh.cell_vertex(c, 0), &b = mesh.cell_vertex(c, 1), &d = mesh.cell_vertex(c, 2);
    for (int i = 0; i < 3; ++i) {
      const Vec3& free = mesh.cell_vertex(c, i);
      Complex acc{0.0, 0.0};
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3 r = rule.map(q, a, b, d);
        const double ph = k * direction.dot(r);
        const double h = std::sin(0.5 * ph);
        acc += rule.weights[q] * e0.dot(r - free) * Complex(-2.0 * h * h, std::sin(ph));
      }
      ex.general[mesh.cell_edge(c, i)] += static_cast<double>(mesh.cell_edge_sign(c, i)) * acc * 0.5;
    }
  }
  return ex;
}

/// Delta-gap source: one-hot on the chosen edge.
inline Excitation excitation_voltage_gap(const TriangleMesh& mesh, Index edge_index) {
  if (edge_index < 0 || edge_index >= mesh.n_edges())
    throw ConfigError("voltage-gap edge index " + std::to_string(edge_index) + " out of range");
  Excitation ex;
  ex.general = ComplexVector::Zero(mesh.n_edges());
  ex.star = ComplexVector::Zero(mesh.n_cells());
  ex.general[edge_index] = 1.0;
  return ex;
}

}  // namespace rfcmp
