#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <type_traits>
#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rfcmp/types.hpp"

namespace rfcmp {

/// Matrix-free square operator acting on blocks of column vectors.
template <typename Scalar>
class LinearOperator {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using BlockFn = std::function<Matrix(const Matrix&)>;

  LinearOperator() = default;
  LinearOperator(Index n, BlockFn fn) : n_(n), fn_(std::move(fn)) {}

  static LinearOperator from_matrix(Matrix m) {
    if (m.rows() != m.cols()) throw ConfigError("operator matrix must be square");
    auto shared = std::make_shared<Matrix>(std::move(m));
    return LinearOperator(shared->rows(), [shared](const Matrix& x) -> Matrix { return (*shared) * x; });
  }

  Index size() const { return n_; }

  Matrix apply(const Matrix& x) const {
    if (x.rows() != n_) throw ConfigError("operator apply: size mismatch");
    return fn_(x);
  }
  Vector apply(const Vector& x) const { return apply(Matrix(x)).col(0); }

  /// Dense matrix of the operator, built column block by column block.
  Matrix materialize(Index block = 256) const {
    Matrix out(n_, n_);
    for (Index c = 0; c < n_; c += block) {
      const Index w = std::min(block, n_ - c);
      Matrix e = Matrix::Zero(n_, w);
      for (Index j = 0; j < w; ++j) e(c + j, j) = Scalar(1);
      out.middleCols(c, w) = apply(e);
    }
    return out;
  }

 private:
  Index n_ = 0;
  BlockFn fn_;
};

using ComplexOperator = LinearOperator<Complex>;
using RealOperator = LinearOperator<double>;

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  double wall_time = 0.0;
  int matvec_count = 0;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

template <typename Scalar>
struct SolveResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solution;
  SolveReport report;
};

/// Raised when CG meets p^H A p <= 0, i.e. the operator is not HPD.
class BreakdownError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Conjugate gradients for Hermitian positive definite operators.
template <typename Scalar>
SolveResult<Scalar> cg_solve(const LinearOperator<Scalar>& op, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs,
                             double tol, int maxit) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult<Scalar> out;
  out.solution = Vector::Zero(rhs.size());
  const double bnorm = rhs.norm();
  out.report.residual_history.push_back(bnorm == 0.0 ? 0.0 : 1.0);
  if (bnorm == 0.0) {
    out.report.converged = true;
    return out;
  }
  Vector r = rhs;
  Vector p = r;
  double rr = r.squaredNorm();
  for (int it = 1; it <= maxit; ++it) {
    const Vector q = op.apply(p);
    ++out.report.matvec_count;
    const Scalar pq = p.dot(q);
    const double curvature = std::real(pq);
    if (!(curvature > 0.0)) throw BreakdownError("CG breakdown: nonpositive curvature, operator is not HPD");
    const Scalar a = rr / curvature;
    out.solution += a * p;
    r -= a * q;
    const double rr_new = r.squaredNorm();
    out.report.iterations = it;
    out.report.residual_history.push_back(std::sqrt(rr_new) / bnorm);
    if (std::sqrt(rr_new) <= tol * bnorm) {
      out.report.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Conjugate gradient squared for general square systems; two products per step.
template <typename Scalar>
SolveResult<Scalar> cgs_solve(const LinearOperator<Scalar>& op, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs,
                              double tol, int maxit) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult<Scalar> out;
  out.solution = Vector::Zero(rhs.size());
  const double bnorm = rhs.norm();
  out.report.residual_history.push_back(bnorm == 0.0 ? 0.0 : 1.0);
  if (bnorm == 0.0) {
    out.report.converged = true;
    return out;
  }
  Vector r = rhs;
  const Vector rt = r;
  Vector p = Vector::Zero(r.size()), q = p, u = p;
  Scalar rho_old(1);
  for (int it = 1; it <= maxit; ++it) {
    const Scalar rho = rt.dot(r);
    if (std::abs(rho) < std::numeric_limits<double>::min() * 1e10 || !std::isfinite(std::abs(rho)))
      throw NumericalError("CGS breakdown: rho vanished");
    if (it == 1) {
      u = r;
      p = u;
    } else {
      const Scalar b = rho / rho_old;
      u = r + b * q;
      p = u + b * (q + b * p);
    }
    const Vector v = op.apply(p);
    const Scalar sigma = rt.dot(v);
    if (std::abs(sigma) == 0.0) throw NumericalError("CGS breakdown: rt.v vanished");
    const Scalar a = rho / sigma;
    q = u - a * v;
    const Vector uq = u + q;
    out.solution += a * uq;
    r -= a * op.apply(uq);
    out.report.matvec_count += 2;
    rho_old = rho;
    const double res = r.norm() / bnorm;
    out.report.iterations = it;
    out.report.residual_history.push_back(res);
    if (!std::isfinite(res)) throw NumericalError("CGS diverged");
    if (res <= tol) {
      out.report.converged = true;
      break;
    }
  }
  out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct PowerIterationOptions {
  double tolerance = 1e-3;
  int max_iterations = 200;
  std::uint64_t seed = 20240531;
};

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Dominant |eigenvalue| by power iteration with a seeded random start.
template <typename Scalar>
PowerIterationResult power_iteration(const LinearOperator<Scalar>& op, const PowerIterationOptions& opts = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  Vector x(op.size());
  for (Index i = 0; i < x.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, Complex>)
      x[i] = Complex(nd(rng), nd(rng));
    else
      x[i] = nd(rng);
  }
  x.normalize();
  PowerIterationResult out;
  double prev = -1.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Vector y = op.apply(x);
    const double est = y.norm();
    out.value = est;
    out.iterations = it;
    if (est == 0.0) {
      out.converged = true;
      return out;
    }
    if (prev > 0.0 && std::abs(est - prev) <= opts.tolerance * est) {
      out.converged = true;
      return out;
    }
    prev = est;
    x = y / est;
  }
  return out;
}

/// CG iteration bound ceil(sqrt(kappa)/2 * log(2/eps)).
inline long cg_iteration_bound(double kappa, double eps) {
  return static_cast<long>(std::ceil(0.5 * std::sqrt(kappa) * std::log(2.0 / eps)));
}

/// 2-norm condition number from a full SVD.
template <typename Derived>
double dense_condition(const Eigen::MatrixBase<Derived>& m, Index cap = 3000) {
  if (m.rows() > cap || m.cols() > cap)
    throw ConfigError("dense_condition: size " + std::to_string(m.rows()) + " exceeds cap " + std::to_string(cap));
  using Plain = typename Derived::PlainObject;
  Eigen::BDCSVD<Plain> svd(m.derived());
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  double smin = s[s.size() - 1];
  if (smin == 0.0) {
    // divide-and-conquer can flush tiny singular values to zero; one-sided
    // Jacobi resolves them to relative accuracy
    Eigen::JacobiSVD<Plain> jac(m.derived());
    smin = jac.singularValues()[s.size() - 1];
  }
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

/// Condition number of a Hermitian matrix from its eigenvalues. The input is
/// symmetrized first to drop round-off skew parts.
template <typename Derived>
double hermitian_condition(const Eigen::MatrixBase<Derived>& m, Index cap = 3000) {
  if (m.rows() > cap) throw ConfigError("hermitian_condition: size exceeds cap");
  using Plain = typename Derived::PlainObject;
  const Plain h = 0.5 * (m.derived() + m.derived().adjoint());
  Eigen::SelfAdjointEigenSolver<Plain> es(h, Eigen::EigenvaluesOnly);
  const auto ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  return lo > 0.0 ? ev.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

template <typename Scalar>
double dense_condition(const LinearOperator<Scalar>& op, Index cap = 3000) {
  if (op.size() > cap) throw ConfigError("dense_condition: size exceeds cap");
  return dense_condition(op.materialize(), cap);
}

}  // namespace rfcmp
