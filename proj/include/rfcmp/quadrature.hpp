#pragma once

#include <algorithm>
#include <array>
#include <utility>
#include <cmath>
#include <vector>

#include "rfcmp/types.hpp"

namespace rfcmp {

/// Rule on the reference triangle. Points are barycentric, weights sum to 1
/// and are scaled by the physical cell area at the use site.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }

  Vec3 map(std::size_t q, const Vec3& a, const Vec3& b, const Vec3& c) const {
    const auto& p = points[q];
    return p[0] * a + p[1] * b + p[2] * c;
  }
};

namespace detail {
// P_n(t) and P_n'(t) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double t) {
  double p0 = 1.0, p1 = t;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (t * p1 - p0) / (t * t - 1.0)};
}
}  // namespace detail

/// Gauss-Legendre nodes and weights on [0, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw ConfigError("Gauss-Legendre order must be >= 1");
  x.assign(n, 0.5);
  w.assign(n, 1.0);
  if (n == 1) return;
  for (int i = 0; i < n / 2 + n % 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre(n, t);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const double dp = detail::legendre(n, t).second;
    x[i] = 0.5 * (1.0 - t);
    x[n - 1 - i] = 0.5 * (1.0 + t);
    w[i] = w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

/// Seven-point symmetric rule, exact for degree 5.
inline QuadratureRule triangle_rule_7() {
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
  const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
  QuadratureRule r;
  r.degree = 5;
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(9.0 / 40.0);
  for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({a, a, b});
    r.points.push_back({a, b, a});
    r.points.push_back({b, a, a});
    r.weights.insert(r.weights.end(), 3, w);
  }
  return r;
}

/// Collapsed (Duffy) product of n-point Gauss rules; n*n points, degree 2n-2.
inline QuadratureRule triangle_rule_conical(int n) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double l1 = x[i];
      const double l2 = x[j] * (1.0 - x[i]);
      r.points.push_back({l1, l2, 1.0 - l1 - l2});
      r.weights.push_back(2.0 * w[i] * w[j] * (1.0 - x[i]));
    }
  return r;
}

/// Rule for integrands with weak (r log r type) singularities on the triangle
/// boundary. The triangle is split at its centroid into three collapsed
/// sub-triangles; Gauss points are pulled toward each outer edge by
/// u = 1 - (1-s)^3 and toward its end vertices by the quintic smoothstep.
/// 3*n*n points.
inline QuadratureRule triangle_rule_graded(int n) {
  if (n < 3) throw ConfigError("graded rule needs n >= 3");
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.degree = std::min((2 * n - 5) / 5, (2 * n - 6) / 3);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < n; ++i) {
      const double s1 = 1.0 - x[i];
      const double u = 1.0 - s1 * s1 * s1;
      const double du = 3.0 * s1 * s1;
      for (int j = 0; j < n; ++j) {
        const double t = x[j];
        const double v = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        const double dv = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        std::array<double, 3> b{};
        for (double& c : b) c = (1.0 - u) / 3.0;
        b[k] += u * (1.0 - v);
        b[(k + 1) % 3] += u * v;
        r.points.push_back(b);
        r.weights.push_back(2.0 / 3.0 * u * du * dv * w[i] * w[j]);
      }
    }
  return r;
}

/// Cheapest available rule of at least the requested degree.
inline QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw ConfigError("quadrature degree must be >= 0");
  if (degree <= 1) {
    QuadratureRule r;
    r.degree = 1;
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(1.0);
    return r;
  }
  if (degree <= 5) return triangle_rule_7();
  return triangle_rule_conical((degree + 3) / 2);
}

}  // namespace rfcmp
