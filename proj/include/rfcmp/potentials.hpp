#pragma once

#include <algorithm>
#include <cmath>

#include "rfcmp/mesh.hpp"
#include "rfcmp/quadrature.hpp"

namespace rfcmp {

/// int_T 1/|r - r'| dS' and int_T (r' - r)/|r - r'| dS' over a flat triangle,
/// closed form (Wilton et al. / Graglia edge sums).
struct TrianglePotential {
  double scalar = 0.0;
  Vec3 vector = Vec3::Zero();
};

inline TrianglePotential triangle_potential(const Vec3& r, const Vec3& q0, const Vec3& q1, const Vec3& q2) {
  const Vec3 nrm = (q1 - q0).cross(q2 - q0);
  const double twice_area = nrm.norm();
  if (!(twice_area > 0.0)) throw MeshError("degenerate source triangle");
  const Vec3 n = nrm / twice_area;
  const double d = n.dot(r - q0);
  const double ad = std::abs(d);
  const Vec3 rho = r - d * n;
  const double scale = std::max({(q1 - q0).norm(), (q2 - q1).norm(), (q0 - q2).norm()});
  const double tiny = 1e-14 * scale;

  const Vec3* q[3] = {&q0, &q1, &q2};
  double i0 = 0.0;
  Vec3 iv = Vec3::Zero();
  for (int e = 0; e < 3; ++e) {
    const Vec3& a = *q[e];
    const Vec3& b = *q[(e + 1) % 3];
    const Vec3 lhat = (b - a).normalized();
    const Vec3 u = lhat.cross(n);
    const double lp = (b - rho).dot(lhat);
    const double lm = (a - rho).dot(lhat);
    const double t0 = (a - rho).dot(u);
    const double r0sq = t0 * t0 + d * d;
    const double rp = (r - b).norm();
    const double rm = (r - a).norm();
    double f = 0.0;
    if (std::sqrt(r0sq) > tiny) {
      // R + l without cancellation when l < 0
      const double np = lp >= 0.0 ? rp + lp : r0sq / (rp - lp);
      const double nm = lm >= 0.0 ? rm + lm : r0sq / (rm - lm);
      f = std::log(np / nm);
    }
    double beta = 0.0;
    if (ad > tiny && std::abs(t0) > tiny)
      beta = std::atan(t0 * lp / (r0sq + ad * rp)) - std::atan(t0 * lm / (r0sq + ad * rm));
    i0 += t0 * f - ad * beta;
    iv += 0.5 * u * (r0sq * f + lp * rp - lm * rm);
  }
  return {i0, iv - d * n * i0};
}

/// Static pair integrals between an observer cell a and a source cell b:
///   S    = int_a int_b 1/(4 pi R)
///   M_ij = int_a int_b (r - p_i).(r' - q_j)/(4 pi R)
/// p_i, q_j are the cell vertices.
struct PairIntegrals {
  double s = 0.0;
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
};

/// Outer-rule tiers for the static pair integrals.
struct StaticQuadrature {
  QuadratureRule touching = triangle_rule_graded(12);  // identical or adjacent cells
  QuadratureRule near = triangle_rule_conical(8);
  QuadratureRule mid = triangle_rule_conical(6);
  QuadratureRule far = triangle_rule_conical(4);
  double near_ratio = 1.5;
  double far_ratio = 4.0;
};

inline PairIntegrals static_pair_integrals(const TriangleMesh& mesh, int a, int b, const QuadratureRule& outer) {
  PairIntegrals out;
  const Vec3 p[3] = {mesh.cell_vertex(a, 0), mesh.cell_vertex(a, 1), mesh.cell_vertex(a, 2)};
  const Vec3 q[3] = {mesh.cell_vertex(b, 0), mesh.cell_vertex(b, 1), mesh.cell_vertex(b, 2)};
  const double area = mesh.cell_area(a);
  for (std::size_t k = 0; k < outer.size(); ++k) {
    const Vec3 r = outer.map(k, p[0], p[1], p[2]);
    const double w = outer.weights[k] * area;
    const TrianglePotential pot = triangle_potential(r, q[0], q[1], q[2]);
    out.s += w * pot.scalar;
    Vec3 g[3];
    for (int j = 0; j < 3; ++j) g[j] = pot.vector + (r - q[j]) * pot.scalar;
    for (int i = 0; i < 3; ++i) {
      const Vec3 ri = r - p[i];
      for (int j = 0; j < 3; ++j) out.m(i, j) += w * ri.dot(g[j]);
    }
  }
  const double c = 1.0 / (4.0 * kPi);
  out.s *= c;
  out.m *= c;
  return out;
}

/// Dynamic remainder (e^{ikR} - 1)/(4 pi R) integrated with a product rule.
struct DynamicPairIntegrals {
  Complex s{0.0, 0.0};
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
};

/// (e^{ix} - 1)/x without cancellation for small x.
inline Complex expm1_over(double kr, double k) {
  if (kr == 0.0) return Complex(0.0, k);
  const double h = std::sin(0.5 * kr);
  return Complex(-2.0 * h * h, std::sin(kr)) * (k / kr);
}

inline DynamicPairIntegrals dynamic_pair_integrals(const std::vector<Vec3>& pa, const std::vector<double>& wa,
                                                   const Vec3 (&p)[3], const std::vector<Vec3>& pb,
                                                   const std::vector<double>& wb, const Vec3 (&q)[3], double k) {
  DynamicPairIntegrals out;
  for (std::size_t x = 0; x < pa.size(); ++x) {
    Complex s{0.0, 0.0};
    Eigen::Vector3cd acc[3] = {Eigen::Vector3cd::Zero(), Eigen::Vector3cd::Zero(), Eigen::Vector3cd::Zero()};
    for (std::size_t y = 0; y < pb.size(); ++y) {
      const double rr = (pa[x] - pb[y]).norm();
      const Complex g = wb[y] * expm1_over(k * rr, k);
      s += g;
      for (int j = 0; j < 3; ++j) acc[j] += g * (pb[y] - q[j]).cast<Complex>();
    }
    out.s += wa[x] * s;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3cd ri = (pa[x] - p[i]).cast<Complex>();
      for (int j = 0; j < 3; ++j) out.m(i, j) += wa[x] * ri.dot(acc[j]);
    }
  }
  const double c = 1.0 / (4.0 * kPi);
  out.s *= c;
  out.m *= c;
  return out;
}

}  // namespace rfcmp
