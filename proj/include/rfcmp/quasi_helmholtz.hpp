#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rfcmp/mesh.hpp"

namespace rfcmp {

/// Loop (edge-vertex) and star (edge-cell) incidence matrices, stored as
/// integers so that Lambda^T Sigma = 0 is exact.
struct LoopStarMatrices {
  SparseIntMatrix lambda;
  SparseIntMatrix sigma;
};

/// Lambda[n, v1] = +1, Lambda[n, v2] = -1, which makes sum_n Lambda[n, v] f_n
/// the surface curl of the hat function at v.
inline SparseIntMatrix build_loop_matrix(const TriangleMesh& mesh) {
  std::vector<Eigen::Triplet<int>> t;
  t.reserve(2 * mesh.n_edges());
  for (int n = 0; n < mesh.n_edges(); ++n) {
    t.emplace_back(n, mesh.edges()[n].v1, 1);
    t.emplace_back(n, mesh.edges()[n].v2, -1);
  }
  SparseIntMatrix m(mesh.n_edges(), mesh.n_vertices());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

/// Sigma[n, c+] = +1, Sigma[n, c-] = -1.
inline SparseIntMatrix build_star_matrix(const TriangleMesh& mesh) {
  std::vector<Eigen::Triplet<int>> t;
  t.reserve(2 * mesh.n_edges());
  for (int n = 0; n < mesh.n_edges(); ++n) {
    t.emplace_back(n, mesh.edges()[n].cell_plus, 1);
    t.emplace_back(n, mesh.edges()[n].cell_minus, -1);
  }
  SparseIntMatrix m(mesh.n_edges(), mesh.n_cells());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

inline LoopStarMatrices build_loop_star(const TriangleMesh& mesh) {
  return {build_loop_matrix(mesh), build_star_matrix(mesh)};
}

enum class PinvBackend { kAuto, kDense, kDeflatedCg };

struct PinvOptions {
  PinvBackend backend = PinvBackend::kAuto;
  double tolerance = 1e-14;
  int max_iterations = 5000;
  Index dense_limit = 2000;
};

/// Applies the Moore-Penrose pseudo-inverse of a connected graph Laplacian.
/// Inputs are projected onto the mean-free subspace; outputs are mean-free.
class LaplacianPinvSolver {
 public:
  LaplacianPinvSolver() = default;

  LaplacianPinvSolver(SparseRealMatrix laplacian, PinvOptions options = {})
      : l_(std::move(laplacian)), options_(options) {
    if (l_.rows() != l_.cols()) throw ConfigError("graph Laplacian must be square");
    diag_ = l_.diagonal();
    for (Index i = 0; i < diag_.size(); ++i)
      if (!(diag_[i] > 0.0)) throw ConfigError("graph Laplacian has an isolated node");
    const bool dense = options_.backend == PinvBackend::kDense ||
                       (options_.backend == PinvBackend::kAuto && l_.rows() <= options_.dense_limit);
    if (dense) {
      Eigen::SelfAdjointEigenSolver<RealMatrix> es{RealMatrix(l_)};
      const RealVector& ev = es.eigenvalues();
      const double cut = 1e-10 * ev.cwiseAbs().maxCoeff();
      RealVector inv = RealVector::Zero(ev.size());
      for (Index i = 0; i < ev.size(); ++i)
        if (ev[i] > cut) inv[i] = 1.0 / ev[i];
      dense_ = std::make_shared<RealMatrix>(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose());
    }
  }

  Index size() const { return l_.rows(); }
  const SparseRealMatrix& laplacian() const { return l_; }
  bool is_dense() const { return static_cast<bool>(dense_); }

  /// Applies to each column of a real block.
  RealMatrix apply(const RealMatrix& x) const {
    if (x.rows() != size()) throw ConfigError("pinv_apply: size mismatch");
    if (dense_) return (*dense_) * x;
    RealMatrix y(x.rows(), x.cols());
    for (Index c = 0; c < x.cols(); ++c) y.col(c) = solve_cg(x.col(c));
    return y;
  }

  ComplexMatrix apply(const ComplexMatrix& x) const {
    const RealMatrix re = apply(RealMatrix(x.real()));
    const RealMatrix im = apply(RealMatrix(x.imag()));
    ComplexMatrix y(x.rows(), x.cols());
    y.real() = re;
    y.imag() = im;
    return y;
  }

  RealVector apply(const RealVector& x) const { return apply(RealMatrix(x)).col(0); }
  ComplexVector apply(const ComplexVector& x) const { return apply(ComplexMatrix(x)).col(0); }

 private:
  // Jacobi-preconditioned CG restricted to the mean-free subspace.
  RealVector solve_cg(const RealVector& rhs) const {
    const Index n = rhs.size();
    RealVector b = rhs.array() - rhs.mean();
    RealVector x = RealVector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return x;
    RealVector r = b;
    RealVector z = r.cwiseQuotient(diag_);
    z.array() -= z.mean();
    RealVector p = z;
    double rz = r.dot(z);
    for (int it = 0; it < options_.max_iterations; ++it) {
      const RealVector q = l_ * p;
      const double pq = p.dot(q);
      if (!(pq > 0.0)) throw NumericalError("graph Laplacian CG broke down");
      const double a = rz / pq;
      x += a * p;
      r -= a * q;
      if (r.norm() <= options_.tolerance * bnorm) {
        x.array() -= x.mean();
        return x;
      }
      z = r.cwiseQuotient(diag_);
      z.array() -= z.mean();
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    throw NumericalError("graph Laplacian CG did not converge in " + std::to_string(options_.max_iterations) +
                         " iterations (relative residual " + std::to_string(r.norm() / bnorm) + ")");
  }

  SparseRealMatrix l_;
  PinvOptions options_;
  RealVector diag_;
  std::shared_ptr<RealMatrix> dense_;
};

inline RealVector pinv_apply(const LaplacianPinvSolver& solver, const RealVector& x) { return solver.apply(x); }

/// Quasi-Helmholtz projectors applied matrix-free:
///   P_Sigma = Sigma (Sigma^T Sigma)^+ Sigma^T, P_LambdaH = I - P_Sigma,
///   P_Lambda = Lambda (Lambda^T Lambda)^+ Lambda^T.
class QuasiHelmholtzProjectors {
 public:
  QuasiHelmholtzProjectors(const LoopStarMatrices& ls, PinvOptions options = {})
      : lambda_(ls.lambda.cast<double>()), sigma_(ls.sigma.cast<double>()) {
    star_ = LaplacianPinvSolver(SparseRealMatrix(sigma_.transpose() * sigma_), options);
    loop_ = LaplacianPinvSolver(SparseRealMatrix(lambda_.transpose() * lambda_), options);
  }

  const SparseRealMatrix& lambda() const { return lambda_; }
  const SparseRealMatrix& sigma() const { return sigma_; }
  const LaplacianPinvSolver& star_pinv() const { return star_; }
  const LaplacianPinvSolver& loop_pinv() const { return loop_; }

  /// (Sigma^T Sigma)^+ Sigma^T x, the star coefficients of P_Sigma x.
  template <typename M>
  M star_coefficients(const M& x) const {
    return star_.apply(M(sigma_.transpose() * x));
  }

  template <typename M>
  M project_sigma(const M& x) const {
    return sigma_ * star_coefficients(x);
  }

  template <typename M>
  M project_lambda_h(const M& x) const {
    return x - project_sigma(x);
  }

  template <typename M>
  M project_lambda(const M& x) const {
    return lambda_ * loop_.apply(M(lambda_.transpose() * x));
  }

 private:
  SparseRealMatrix lambda_;
  SparseRealMatrix sigma_;
  LaplacianPinvSolver star_;
  LaplacianPinvSolver loop_;
};

}  // namespace rfcmp
