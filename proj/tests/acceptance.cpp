// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "rfcmp.hpp"

using namespace rfcmp;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << std::endl;
  if (!ok) ++failures;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

const std::vector<double> kSweep{1e-25, 1e-15, 1e-5, 1.0, 1e3, 1e6};

Excitation plane_wave(const TriangleMesh& m, double k) {
  return excitation_planewave(m, Vec3(0, 0, 1), Vec3(1, 0, 0), k, 1.0);
}

std::vector<double> rfcmp_conditions(const Problem& p, Formulation f, const std::vector<double>& freqs) {
  std::vector<double> c;
  for (double hz : freqs) c.push_back(formulation_condition(p, p.blocks(wavenumber_from_frequency(hz)), f));
  return c;
}

int cg_iterations(const Problem& p, double hz, double tol, RfCmpForm form = RfCmpForm::kImplementation) {
  const double k = wavenumber_from_frequency(hz);
  const RfCmpOperator op(p.ops, p.blocks(k), form);
  const auto r = cg_solve(op.system_operator(), op.build_rhs(plane_wave(*p.mesh, k)), tol, 2000);
  return r.report.converged ? r.report.iterations : -1;
}

void criterion1(const Problem& s2) {
  const auto impl = rfcmp_conditions(s2, Formulation::kRfCmpImpl, kSweep);
  const auto theory = rfcmp_conditions(s2, Formulation::kRfCmpTheory, kSweep);
  const double c_hi = formulation_condition(s2, s2.blocks(wavenumber_from_frequency(1e6)), Formulation::kNone);
  const double c_lo = formulation_condition(s2, s2.blocks(wavenumber_from_frequency(1.0)), Formulation::kNone);
  const double spread = max_of(impl) / median(impl);
  report(1, spread < 3.0 && c_lo / c_hi >= 1e3,
         "sphere level 2, 1e-25..1e6 Hz: rfcmp-impl cond " + fmt(min_of(impl)) + ".." + fmt(max_of(impl)) +
             " (max/median " + fmt(spread) + "), rfcmp-theory " + fmt(min_of(theory)) + ".." + fmt(max_of(theory)) +
             "; unpreconditioned cond grows x" + fmt(c_lo / c_hi) + " from 1 MHz to 1 Hz");
}

void criterion2(const std::vector<const Problem*>& sp) {
  std::vector<double> rf, ls;
  for (const Problem* p : sp) {
    const DynamicBlocks b = p->blocks(wavenumber_from_frequency(1e6));
    rf.push_back(formulation_condition(*p, b, Formulation::kRfCmpImpl));
    ls.push_back(formulation_condition(*p, b, Formulation::kLoopStar));
  }
  bool growth = true;
  std::string ls_txt;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    ls_txt += (i ? ", " : "") + fmt(ls[i]);
    if (i > 0) growth = growth && ls[i] >= 2.0 * ls[i - 1];
  }
  const double spread = max_of(rf) / min_of(rf);
  report(2, spread <= 2.0 && growth,
         "sphere levels 1-3 at 1 MHz: rfcmp-impl cond max/min " + fmt(spread) + "; loop-star cond " + ls_txt);
}

void criterion3() {
  RunConfig cfg;
  cfg.mesh = "torus";
  const Problem t0 = Problem::build(mesh_for_level(cfg, 0));
  const auto freq = rfcmp_conditions(t0, Formulation::kRfCmpImpl, kSweep);
  cfg.torus_n_major = 8;
  cfg.torus_n_minor = 4;
  std::vector<double> refine;
  bool traces = true;
  for (int level = 0; level <= 2; ++level) {
    const Problem p = Problem::build(mesh_for_level(cfg, level), level);
    refine.push_back(formulation_condition(p, p.blocks(wavenumber_from_frequency(1e6)), Formulation::kRfCmpImpl));
    if (p.mesh->n_edges() <= 800) {
      const Index n = p.mesh->n_edges();
      const RealMatrix ps = p.ops->projectors().project_sigma(RealMatrix(RealMatrix::Identity(n, n)));
      traces = traces && std::abs((n - ps.trace()) - (p.mesh->n_vertices() - 1 + 2)) < 1e-8;
    }
  }
  const double fs = max_of(freq) / median(freq), rs = max_of(refine) / median(refine);
  report(3, fs < 3.0 && rs < 3.0 && traces,
         "torus: frequency sweep cond max/median " + fmt(fs) + ", refinement sweep (3 levels) max/median " + fmt(rs) +
             ", harmonic projector trace = N_V + 1 " + (traces ? "holds" : "violated"));
}

void criterion4(const Problem& s3) {
  std::vector<double> err;
  for (double hz : {1e6, 1e-25}) {
    const double k = wavenumber_from_frequency(hz);
    const SolveOutcome out =
        solve_formulation(s3, s3.blocks(k), Formulation::kRfCmpImpl, "cg", plane_wave(*s3.mesh, k), 1e-8, 2000);
    err.push_back(out.report.converged ? rcs_versus_mie(*s3.mesh, &out.current, k, 1.0).second : 1e9);
  }
  report(4, max_of(err) < 2.0,
         "sphere level 3 bistatic RCS vs Mie, L2 error " + fmt(err[0]) + " % at 1 MHz, " + fmt(err[1]) + " % at 1e-25 Hz");
}

void criterion5(const Problem& s2) {
  double herm = 0.0, min_rq = std::numeric_limits<double>::infinity();
  bool converged = true;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const Index n = s2.mesh->n_edges();
  auto rnd = [&] {
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = Complex(nd(rng), nd(rng));
    return v;
  };
  for (double hz : kSweep) {
    const double k = wavenumber_from_frequency(hz);
    const RfCmpOperator op(s2.ops, s2.blocks(k));
    const double anorm = power_iteration(op.system_operator()).value;
    for (int t = 0; t < 10; ++t) {
      const ComplexVector x = rnd(), y = rnd();
      const ComplexVector ax = op.apply_system(x), ay = op.apply_system(y);
      herm = std::max(herm, std::abs(x.dot(ay) - std::conj(y.dot(ax))) / (anorm * x.norm() * y.norm()));
      min_rq = std::min(min_rq, x.dot(ax).real() / (anorm * x.squaredNorm()));
    }
    converged = converged && cg_iterations(s2, hz, 1e-4) > 0;
  }
  report(5, herm < 1e-10 && min_rq > 0.0 && converged,
         "sphere level 2 over the sweep: Hermiticity defect " + fmt(herm) + ", min Rayleigh quotient/||A|| " +
             fmt(min_rq) + ", CG " + (converged ? "converged" : "did not converge") + " at every frequency");
}

void criterion6() {
  const Problem p = Problem::build(make_sphere(1.0, 1));  // 120 edges
  const MeshOperators& o = *p.ops;
  const Index ne = p.mesh->n_edges();
  const RealMatrix lam(o.lambda()), sig(o.sigma());
  double worst = 0.0;
  auto track = [&](double v) { worst = std::max(worst, v); };
  track((lam.transpose() * sig).norm());
  const RealMatrix id = RealMatrix::Identity(ne, ne);
  const RealMatrix ps = o.projectors().project_sigma(id);
  const RealMatrix pl = o.projectors().project_lambda_h(id);
  track((ps * ps - ps).norm() / ps.norm());
  track((pl * pl - pl).norm() / pl.norm());
  track((ps + pl - id).norm() / id.norm());
  track((ps * sig - sig).norm() / sig.norm());
  track((ps * lam).norm() / lam.norm());
  const RealMatrix d(laplace_beltrami(*p.mesh));
  track((lam.transpose() * RealMatrix(gram_ff(*p.mesh)) * lam - d).norm() / d.norm());
  const RealMatrix w = assemble_W(*p.mesh, o.static_cache());
  track((w * RealVector::Ones(w.rows())).norm() / w.norm());
  track((lam.transpose() * o.static_cache().ta0 * lam - w).norm() / w.norm());
  const ComplexMatrix tp = assemble_TPhi(*p.mesh, p.blocks(1.0));
  track((tp * lam).norm() / tp.norm());
  const RealMatrix svs = sig * assemble_V(*p.mesh, o.static_cache()) * sig.transpose();
  track((assemble_TPhi(*p.mesh, 0.0, o.static_cache()) - svs.cast<Complex>()).norm() / svs.norm());
  report(6, worst < 1e-10, "discrete identities on sphere level 1 (120 edges), worst relative defect " + fmt(worst));
}

void criterion7(const std::vector<const Problem*>& sp) {
  std::vector<double> ratio;
  for (const Problem* p : sp) {
    const RealMatrix w = assemble_W(*p->mesh, p->ops->static_cache());
    const RealMatrix wh = deflected_W(*p->mesh, w);
    const RealMatrix g(p->ops->gram_lambda_matrix());
    const RealMatrix a = wh * g.llt().solve(wh);
    const RealMatrix b = deflected_laplacian(*p->mesh);
    Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> es(0.5 * (a + a.transpose()), b, Eigen::EigenvaluesOnly);
    ratio.push_back(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff());
  }
  double change = 0.0;
  for (std::size_t i = 1; i < ratio.size(); ++i) change = std::max(change, std::abs(ratio[i] / ratio[i - 1] - 1.0));
  report(7, change < 0.25,
         "generalized spectrum of (W^ G^-1 W^, Delta^) max/min " + fmt(ratio[0]) + ", " + fmt(ratio[1]) + ", " +
             fmt(ratio[2]) + " on sphere levels 1-3, largest change " + fmt(100.0 * change) + " %");
}

void criterion8(const Problem& s2) {
  bool ok = true;
  std::ostringstream os;
  for (double hz : {1e6, 1.0, 1e-25}) {
    const double k = wavenumber_from_frequency(hz);
    const double kappa = formulation_condition(s2, s2.blocks(k), Formulation::kRfCmpImpl);
    const long bound = cg_iteration_bound(kappa, 1e-6);
    const int it = cg_iterations(s2, hz, 1e-6);
    ok = ok && it > 0 && it <= bound;
    os << (hz == 1e6 ? "" : ", ") << it << "/" << bound << " at " << fmt(hz) << " Hz";
  }
  report(8, ok, "sphere level 2 CG iterations vs bound sqrt(kappa)/2 ln(2/eps), eps 1e-6: " + os.str());
}

void criterion9(const std::vector<const Problem*>& sp) {
  bool ok = true;
  std::ostringstream os;
  for (double hz : {1e6, 1e-25}) {
    std::vector<double> impl, theory;
    for (const Problem* p : sp) {
      impl.push_back(cg_iterations(*p, hz, 1e-4));
      theory.push_back(cg_iterations(*p, hz, 1e-4, RfCmpForm::kTheory));
    }
    const double var = (max_of(impl) - min_of(impl)) / min_of(impl);
    // the refinement study runs at 1 MHz as in criterion 2; the static limit is reported alongside
    if (hz == 1e6) ok = ok && min_of(impl) > 0 && var < 0.2;
    os << (hz == 1e6 ? "" : "; reported only: ") << fmt(hz) << " Hz impl " << impl[0] << "/" << impl[1] << "/" << impl[2]
       << " (variation " << fmt(100.0 * var) << " %), theory " << theory[0] << "/" << theory[1] << "/" << theory[2];
  }
  report(9, ok, "CG iterations at tol 1e-4 on sphere levels 1-3: " + os.str());
}

}  // namespace

int main() {
  try {
    const Problem s1 = Problem::build(make_sphere(1.0, 1), 1);
    const Problem s2 = Problem::build(make_sphere(1.0, 2), 2);
    const Problem s3 = Problem::build(make_sphere(1.0, 3), 3);
    const std::vector<const Problem*> spheres{&s1, &s2, &s3};
    criterion1(s2);
    criterion2(spheres);
    criterion3();
    criterion4(s3);
    criterion5(s2);
    criterion6();
    criterion7(spheres);
    criterion8(s2);
    criterion9(spheres);
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
