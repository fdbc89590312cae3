#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "rfcmp/efie.hpp"
#include "rfcmp/quadrature.hpp"
#include "rfcmp/rf_preconditioner.hpp"

namespace rfcmp {

/// Radiation vector N(r) = int j(r') exp(-ik r.r') dS' along a set of directions.
///
/// The zeroth moment int j is taken from the cell charges alone
/// (int j = -sum_c centroid_c (Sigma^T j)_c on a closed surface); the loop
/// part contributes nothing to it. The rest, int j (exp(-ik r.r') - 1), is
/// integrated numerically. Near the static limit this avoids summing an O(1)
/// loop current to get an O(k) dipole moment.
inline std::vector<Eigen::Vector3cd> far_field(const TriangleMesh& mesh, const CurrentSolution& j, double k,
                                               const std::vector<Vec3>& directions,
                                               const QuadratureRule& rule = triangle_rule_conical(4)) {
  if (!(k > 0.0)) throw ConfigError("far_field needs k > 0");
  if (j.loop.size() != mesh.n_edges() || j.star.size() != mesh.n_edges() || j.charge.size() != mesh.n_cells())
    throw ConfigError("current size does not match the mesh");
  Eigen::Vector3cd n0 = Eigen::Vector3cd::Zero();
  for (int c = 0; c < mesh.n_cells(); ++c) n0 -= mesh.cell_centroid(c).cast<Complex>() * j.charge[c];

  const ComplexVector total = j.total();
  std::vector<Eigen::Vector3cd> out(directions.size(), n0);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec3 &a = mesh.cell_vertex(c, 0), &b = mesh.cell_vertex(c, 1), &d = mesh.cell_vertex(c, 2);
    Complex coef[3];
    for (int i = 0; i < 3; ++i) coef[i] = static_cast<double>(mesh.cell_edge_sign(c, i)) * total[mesh.cell_edge(c, i)];
    // j(r) on this cell is sum_i coef_i (r - p_i)/(2A); the area cancels the rule scaling
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 r = rule.map(q, a, b, d);
      Eigen::Vector3cd jr = Eigen::Vector3cd::Zero();
      for (int i = 0; i < 3; ++i) jr += coef[i] * (r - mesh.cell_vertex(c, i)).cast<Complex>();
      jr *= 0.5 * rule.weights[q];
      for (std::size_t s = 0; s < directions.size(); ++s) {
        const double ph = k * directions[s].dot(r);
        const double h = std::sin(0.5 * ph);
        out[s] += Complex(-2.0 * h * h, -std::sin(ph)) * jr;
      }
    }
  }
  return out;
}

/// A phi = const cut of the bistatic pattern.
struct FarFieldCut {
  std::vector<double> theta;
  double phi = 0.0;
  std::vector<Complex> n_theta;
  std::vector<Complex> n_phi;
  std::vector<double> sigma;
};

inline std::vector<double> degree_grid(double start, double stop, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((stop - start) / step + 0.5));
  for (int i = 0; i <= n; ++i) out.push_back((start + i * step) * kPi / 180.0);
  return out;
}

/// sigma = k^2 |N_perp|^2 / (4 pi |E0|^2) for eta-normalized currents.
inline FarFieldCut far_field_cut(const TriangleMesh& mesh, const CurrentSolution& j, double k,
                                 const std::vector<double>& theta, double phi, double amplitude = 1.0) {
  std::vector<Vec3> dirs;
  for (double t : theta) dirs.emplace_back(std::sin(t) * std::cos(phi), std::sin(t) * std::sin(phi), std::cos(t));
  const auto n = far_field(mesh, j, k, dirs);
  FarFieldCut cut;
  cut.theta = theta;
  cut.phi = phi;
  for (std::size_t s = 0; s < theta.size(); ++s) {
    const double t = theta[s];
    const Vec3 et(std::cos(t) * std::cos(phi), std::cos(t) * std::sin(phi), -std::sin(t));
    const Vec3 ep(-std::sin(phi), std::cos(phi), 0.0);
    const Complex nt = et.cast<Complex>().dot(n[s]);
    const Complex np = ep.cast<Complex>().dot(n[s]);
    cut.n_theta.push_back(nt);
    cut.n_phi.push_back(np);
    cut.sigma.push_back(k * k * (std::norm(nt) + std::norm(np)) / (4.0 * kPi * amplitude * amplitude));
  }
  return cut;
}

inline double to_dbsm(double sigma) { return 10.0 * std::log10(sigma); }

/// RCS in dBsm from far-field amplitudes F with sigma = 4 pi |F|^2.
inline std::vector<double> rcs_bistatic(const std::vector<Complex>& far) {
  std::vector<double> out;
  for (const Complex& f : far) out.push_back(to_dbsm(4.0 * kPi * std::norm(f)));
  return out;
}

inline std::vector<double> rcs_bistatic(const FarFieldCut& cut) {
  std::vector<double> out;
  for (double s : cut.sigma) out.push_back(to_dbsm(s));
  return out;
}

namespace detail {

// psi_n(x) = x j_n(x) for n = 0..nmax, by Miller's downward recurrence.
inline std::vector<double> riccati_psi(int nmax, double x) {
  const int start = nmax + 20 + static_cast<int>(std::ceil(x));
  std::vector<double> j(start + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-280;
  for (int n = start; n >= 1; --n) {
    j[n - 1] = (2.0 * n + 1.0) / x * j[n] - j[n + 1];
    if (std::abs(j[n - 1]) > 1e250)
      for (int m = n - 1; m <= start; ++m) j[m] *= 1e-250;
  }
  // normalize against the closed forms of j_0 or j_1, whichever is larger
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / j[0] : j1 / j[1];
  std::vector<double> psi(nmax + 1);
  for (int n = 0; n <= nmax; ++n) psi[n] = x * j[n] * scale;
  return psi;
}

// chi_n(x) = -x y_n(x), upward recurrence (stable for y_n).
inline std::vector<double> riccati_chi(int nmax, double x) {
  std::vector<double> chi(nmax + 1);
  chi[0] = std::cos(x);
  if (nmax >= 1) chi[1] = std::cos(x) / x + std::sin(x);
  for (int n = 1; n < nmax; ++n) chi[n + 1] = (2.0 * n + 1.0) / x * chi[n] - chi[n - 1];
  return chi;
}

}  // namespace detail

inline int mie_terms(double x) {
  return std::max(10, static_cast<int>(std::ceil(x + 4.0 * std::cbrt(x) + 2.0)));
}

/// Bistatic RCS of a PEC sphere in the E-plane (incident E in the cut plane),
/// sigma = 4 pi |S2|^2 / k^2. Below ka = 1e-6 the Rayleigh limit is used.
inline std::vector<double> mie_rcs(double radius, double k, const std::vector<double>& theta, int n_terms = 0) {
  if (!(radius > 0.0) || !(k > 0.0)) throw ConfigError("mie_rcs needs radius > 0 and k > 0");
  const double x = k * radius;
  if (x > 1e4) throw ConfigError("mie_rcs: size parameter too large");
  std::vector<double> out;
  if (x < 1e-6 && n_terms == 0) {
    const double a6 = std::pow(radius, 6);
    for (double t : theta) {
      const double f = 1.0 - 2.0 * std::cos(t);
      out.push_back(kPi * std::pow(k, 4) * a6 * f * f);
    }
    return out;
  }
  const int nmax = n_terms > 0 ? n_terms : mie_terms(x);
  const auto psi = detail::riccati_psi(nmax, x);
  const auto chi = detail::riccati_chi(nmax, x);
  std::vector<Complex> a(nmax + 1), b(nmax + 1);
  for (int n = 1; n <= nmax; ++n) {
    const Complex xi(psi[n], -chi[n]);
    const Complex xi1(psi[n - 1], -chi[n - 1]);
    const double dpsi = psi[n - 1] - n * psi[n] / x;
    const Complex dxi = xi1 - static_cast<double>(n) * xi / x;
    a[n] = dpsi / dxi;
    b[n] = psi[n] / xi;
  }
  for (double t : theta) {
    const double mu = std::cos(t);
    double pi_prev = 0.0, pi_n = 1.0;
    Complex s2(0.0, 0.0);
    for (int n = 1; n <= nmax; ++n) {
      const double tau = n * mu * pi_n - (n + 1) * pi_prev;
      s2 += (2.0 * n + 1.0) / (n * (n + 1.0)) * (a[n] * tau + b[n] * pi_n);
      const double pi_next = ((2.0 * n + 1.0) * mu * pi_n - (n + 1.0) * pi_prev) / n;
      pi_prev = pi_n;
      pi_n = pi_next;
    }
    out.push_back(4.0 * kPi * std::norm(s2) / (k * k));
  }
  return out;
}

/// ||a - b|| / ||b|| in percent.
inline double l2_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("l2_relative_error: sampling grids differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) throw ConfigError("l2_relative_error: reference curve is zero");
  return 100.0 * std::sqrt(num / den);
}

}  // namespace rfcmp
