#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "rfcmp/discretization.hpp"
#include "rfcmp/efie.hpp"
#include "rfcmp/krylov.hpp"
#include "rfcmp/quasi_helmholtz.hpp"

namespace rfcmp {

/// Frequency-independent operators of one mesh: incidence matrices,
/// projectors, Gram factorizations and the static EFIE cache.
class MeshOperators {
 public:
  MeshOperators(const TriangleMesh& mesh, PinvOptions pinv = {}, const StaticQuadrature& quad = {})
      : mesh_(mesh),
        ls_(build_loop_star(mesh)),
        projectors_(ls_, pinv),
        g_ll_(gram_lambda(mesh)),
        g_dual_(gram_dual_lambda_p(mesh)),
        cache_(build_static_cache(mesh, quad)) {
    areas_.resize(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) areas_[c] = mesh.cell_area(c);
    g_ll_llt_ = std::make_unique<Eigen::SimplicialLLT<SparseRealMatrix>>(g_ll_);
    if (g_ll_llt_->info() != Eigen::Success) throw NumericalError("G_ll factorization failed");
    g_dual_lu_ = std::make_unique<Eigen::SparseLU<SparseRealMatrix>>();
    g_dual_lu_->analyzePattern(g_dual_);
    g_dual_lu_->factorize(g_dual_);
    if (g_dual_lu_->info() != Eigen::Success) throw NumericalError("mixed dual Gram factorization failed");
  }

  const TriangleMesh& mesh() const { return mesh_; }
  const LoopStarMatrices& loop_star() const { return ls_; }
  const QuasiHelmholtzProjectors& projectors() const { return projectors_; }
  const SparseRealMatrix& lambda() const { return projectors_.lambda(); }
  const SparseRealMatrix& sigma() const { return projectors_.sigma(); }
  const SparseRealMatrix& gram_lambda_matrix() const { return g_ll_; }
  const SparseRealMatrix& gram_dual_matrix() const { return g_dual_; }
  const RealVector& areas() const { return areas_; }
  const StaticEfieCache& static_cache() const { return cache_; }

  /// G_ll^{-1} x, column by column, real and imaginary parts separately.
  ComplexMatrix solve_gram_lambda(const ComplexMatrix& x) const { return split_solve(*g_ll_llt_, x); }
  ComplexMatrix solve_gram_dual(const ComplexMatrix& x) const { return split_solve(*g_dual_lu_, x); }

  /// Lambda G_ll^{-1} Lambda^T x.
  ComplexMatrix loop_gram_term(const ComplexMatrix& x) const {
    return lambda() * solve_gram_lambda(lambda().transpose() * x);
  }

 private:
  template <typename Solver>
  static ComplexMatrix split_solve(const Solver& s, const ComplexMatrix& x) {
    // solve into plain matrices; SparseLU cannot write through a strided view
    const RealMatrix re = s.solve(RealMatrix(x.real()));
    const RealMatrix im = s.solve(RealMatrix(x.imag()));
    ComplexMatrix y(x.rows(), x.cols());
    y.real() = re;
    y.imag() = im;
    return y;
  }

  const TriangleMesh& mesh_;
  LoopStarMatrices ls_;
  QuasiHelmholtzProjectors projectors_;
  SparseRealMatrix g_ll_;
  SparseRealMatrix g_dual_;
  RealVector areas_;
  StaticEfieCache cache_;
  std::unique_ptr<Eigen::SimplicialLLT<SparseRealMatrix>> g_ll_llt_;
  std::unique_ptr<Eigen::SparseLU<SparseRealMatrix>> g_dual_lu_;
};

/// Which definition of the outer projector and scalings is used.
///   kImplementation: P_o = P_LambdaH/alpha + i P_Sigma/beta, norms by power iteration.
///   kTheory:         P_o = P_LambdaH/sqrt(k) + i P_gSigma sqrt(k), gamma = k.
enum class RfCmpForm { kImplementation, kTheory };

struct ScalingConstants {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  bool converged = true;
};

/// Current j = P_o i kept as its two quasi-Helmholtz parts. `charge` is
/// Sigma^T star computed without forming the star vector.
struct CurrentSolution {
  ComplexVector loop;
  ComplexVector star;
  ComplexVector charge;

  ComplexVector total() const { return loop + star; }
};

/// The refinement-free Calderon system A = P_o^H T^H P_m T P_o.
///
/// T is never formed. Its two blocks act separately, A_blk = ik T_A on edges
/// and T_Phi/(ik) = Sigma V Sigma^T/(ik) through cell charges, and every
/// product that vanishes identically (T_Phi Lambda, Lambda^T Sigma,
/// P_LambdaH Sigma) is dropped instead of evaluated. That keeps the apply
/// free of cancellation down to the static limit.
class RfCmpOperator {
 public:
  RfCmpOperator(std::shared_ptr<const MeshOperators> ops, const DynamicBlocks& blocks,
                RfCmpForm form = RfCmpForm::kImplementation, const PowerIterationOptions& power = {},
                std::optional<ScalingConstants> scalings = std::nullopt)
      : ops_(std::move(ops)), form_(form), k_(blocks.k) {
    if (!(k_ > 0.0)) throw ConfigError("the preconditioned system needs k > 0");
    a_blk_ = Complex(0.0, k_) * blocks.t_a;
    v_ = blocks.v;
    if (scalings) {
      if (!(scalings->alpha > 0.0 && scalings->beta > 0.0 && scalings->gamma > 0.0))
        throw ConfigError("scalings must be positive");
      s_ = *scalings;
    } else if (form_ == RfCmpForm::kTheory) {
      s_ = {std::sqrt(k_), 1.0 / std::sqrt(k_), k_, true};
    } else {
      s_ = estimate_scalings(power);
    }
  }

  Index size() const { return ops_->mesh().n_edges(); }
  double wavenumber() const { return k_; }
  RfCmpForm form() const { return form_; }
  const ScalingConstants& scalings() const { return s_; }
  const MeshOperators& mesh_operators() const { return *ops_; }
  const ComplexMatrix& a_block() const { return a_blk_; }
  const ComplexMatrix& v_block() const { return v_; }

  ComplexMatrix apply_system(const ComplexMatrix& x) const {
    const Forward f = forward(x);
    return back(f.y_a, f.y_w);
  }
  ComplexVector apply_system(const ComplexVector& x) const { return apply_system(ComplexMatrix(x)).col(0); }

  ComplexOperator system_operator() const {
    return ComplexOperator(size(), [this](const ComplexMatrix& x) { return apply_system(x); });
  }

  /// -P_o^H T^H P_m e.
  ComplexVector build_rhs(const Excitation& e) const {
    if (e.general.size() != size() || e.star.size() != ops_->mesh().n_cells())
      throw ConfigError("excitation size does not match the mesh");
    return -back(ComplexMatrix(e.general), ComplexMatrix(e.star)).col(0);
  }

  /// j = P_o i.
  CurrentSolution recover_current(const ComplexVector& i) const {
    if (i.size() != size()) throw ConfigError("solution size mismatch");
    const Split sp = split(ComplexMatrix(i));
    const Complex ib(0.0, 1.0 / s_.beta);
    CurrentSolution j;
    j.loop = sp.u.col(0) / s_.alpha;
    j.star = ib * (sigma() * sp.c).col(0);
    j.charge = ib * sp.q.col(0);
    return j;
  }

  /// Sigma (Sigma^T Sigma)^+ G_dual^{-1} Sigma^T x.
  ComplexMatrix apply_PgSigma(const ComplexMatrix& x) const {
    return sigma() * star_pinv(ops_->solve_gram_dual(sigma().transpose() * x));
  }
  ComplexMatrix apply_PgSigma_transpose(const ComplexMatrix& x) const {
    return sigma() * ops_->solve_gram_dual(star_pinv(sigma().transpose() * x));
  }

  /// Middle matrix with the implementation weights 1/alpha^2, 1/gamma, 1/beta^2.
  ComplexMatrix apply_Pm(const ComplexMatrix& x) const {
    const ComplexMatrix c = star_pinv(sigma().transpose() * x);
    ComplexMatrix out = ops_->loop_gram_term(x) / (s_.alpha * s_.alpha);
    out += (x - sigma() * c) / s_.gamma;
    out += sigma() * star_pinv(scale_by_area(c)) / (s_.beta * s_.beta);
    return out;
  }

  ComplexMatrix apply_Po(const ComplexMatrix& x) const {
    const Complex ib(0.0, 1.0 / s_.beta);
    const ComplexMatrix c = star_pinv(sigma().transpose() * x);
    ComplexMatrix out = (x - sigma() * c) / s_.alpha;
    out += ib * (form_ == RfCmpForm::kTheory ? apply_PgSigma(x) : ComplexMatrix(sigma() * c));
    return out;
  }

  ComplexMatrix apply_Po_dagger(const ComplexMatrix& x) const {
    const Complex ib(0.0, 1.0 / s_.beta);
    const ComplexMatrix c = star_pinv(sigma().transpose() * x);
    ComplexMatrix out = (x - sigma() * c) / s_.alpha;
    out -= ib * (form_ == RfCmpForm::kTheory ? apply_PgSigma_transpose(x) : ComplexMatrix(sigma() * c));
    return out;
  }

  /// Operators whose 2-norms define alpha^4, beta^4 and gamma.
  ComplexOperator alpha_operator() const {
    return ComplexOperator(size(), [this](const ComplexMatrix& x) {
      const ComplexMatrix u = project_lh(x);
      return project_lh(a_blk_.adjoint() * ops_->loop_gram_term(a_blk_ * u));
    });
  }
  ComplexOperator beta_operator() const {
    return ComplexOperator(size(), [this](const ComplexMatrix& x) {
      ComplexMatrix w = v_ * ComplexMatrix(sigma().transpose() * x);
      remove_mean(w);
      w = scale_by_area(w);
      remove_mean(w);
      return ComplexMatrix(sigma() * ComplexMatrix(v_.conjugate() * w) / (k_ * k_));
    });
  }
  ComplexOperator gamma_operator(double alpha) const {
    return ComplexOperator(size(), [this, alpha](const ComplexMatrix& x) {
      const ComplexMatrix u = project_lh(x);
      return ComplexMatrix(project_lh(a_blk_.adjoint() * project_lh(a_blk_ * u)) / (alpha * alpha));
    });
  }

  ScalingConstants estimate_scalings(const PowerIterationOptions& power) const {
    ScalingConstants s;
    const PowerIterationResult a = power_iteration(alpha_operator(), power);
    const PowerIterationResult b = power_iteration(beta_operator(), power);
    s.alpha = std::pow(a.value, 0.25);
    s.beta = std::pow(b.value, 0.25);
    const PowerIterationResult g = power_iteration(gamma_operator(s.alpha), power);
    s.gamma = g.value;
    s.converged = a.converged && b.converged && g.converged;
    if (!(s.alpha > 0.0 && s.beta > 0.0 && s.gamma > 0.0) || !std::isfinite(s.alpha * s.beta * s.gamma))
      throw NumericalError("scaling estimation produced a non-positive norm");
    return s;
  }

 private:
  struct Split {
    ComplexMatrix u;  // P_LambdaH x
    ComplexMatrix c;  // star coefficients of the outer projector
    ComplexMatrix q;  // Sigma^T Sigma c
  };
  struct Forward {
    ComplexMatrix y_a;
    ComplexMatrix y_w;
  };

  const SparseRealMatrix& sigma() const { return ops_->sigma(); }

  ComplexMatrix star_pinv(const ComplexMatrix& x) const { return ops_->projectors().star_pinv().apply(x); }

  ComplexMatrix project_lh(const ComplexMatrix& x) const {
    return x - sigma() * star_pinv(sigma().transpose() * x);
  }

  static void remove_mean(ComplexMatrix& x) { x.rowwise() -= x.colwise().mean(); }

  // G_pp^{-1} is diag(A).
  ComplexMatrix scale_by_area(const ComplexMatrix& x) const {
    ComplexMatrix y = x;
    for (Index c = 0; c < y.cols(); ++c) y.col(c).array() *= ops_->areas().array().cast<Complex>();
    return y;
  }

  Split split(const ComplexMatrix& x) const {
    Split sp;
    const ComplexMatrix st = sigma().transpose() * x;
    const ComplexMatrix c_ls = star_pinv(st);
    sp.u = x - sigma() * c_ls;
    if (form_ == RfCmpForm::kTheory) {
      sp.q = ops_->solve_gram_dual(st);
      remove_mean(sp.q);
      sp.c = star_pinv(sp.q);
    } else {
      sp.c = c_ls;
      sp.q = st;
    }
    return sp;
  }

  // T P_o x = y_a + Sigma y_w
  Forward forward(const ComplexMatrix& x) const {
    const Split sp = split(x);
    const Complex ib(0.0, 1.0 / s_.beta);
    Forward f;
    const ComplexMatrix j = sp.u / s_.alpha + ib * ComplexMatrix(sigma() * sp.c);
    f.y_a = a_blk_ * j;
    f.y_w = v_ * sp.q / (k_ * s_.beta);
    return f;
  }

  // P_o^H T^H P_m (y_a + Sigma y_w)
  ComplexMatrix back(const ComplexMatrix& y_a, const ComplexMatrix& y_w) const {
    const double a2 = s_.alpha * s_.alpha, b2 = s_.beta * s_.beta;
    const ComplexMatrix c_a = star_pinv(sigma().transpose() * y_a);
    ComplexMatrix z = ops_->loop_gram_term(y_a) / a2;
    z += (y_a - sigma() * c_a) / s_.gamma;

    ComplexMatrix yw = y_w;
    remove_mean(yw);
    ComplexMatrix r = scale_by_area(c_a + yw) / b2;
    const ComplexMatrix z_w = star_pinv(r);
    remove_mean(r);  // = Sigma^T Sigma z_w
    z += sigma() * z_w;

    const ComplexMatrix t = a_blk_.adjoint() * z;
    const ComplexMatrix w = Complex(0.0, 1.0 / k_) * (v_.conjugate() * r);
    const ComplexMatrix c_t = star_pinv(sigma().transpose() * t);
    ComplexMatrix out = (t - sigma() * c_t) / s_.alpha;
    const Complex ib(0.0, 1.0 / s_.beta);
    if (form_ == RfCmpForm::kTheory) {
      ComplexMatrix ww = w;
      remove_mean(ww);
      out -= ib * ComplexMatrix(sigma() * ops_->solve_gram_dual(c_t + ww));
    } else {
      out -= ib * ComplexMatrix(sigma() * (c_t + w));
    }
    return out;
  }

  std::shared_ptr<const MeshOperators> ops_;
  RfCmpForm form_;
  double k_;
  ComplexMatrix a_blk_;
  ComplexMatrix v_;
  ScalingConstants s_;
};

}  // namespace rfcmp
