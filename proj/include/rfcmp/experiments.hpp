#pragma once

#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rfcmp/io.hpp"
#include "rfcmp/postprocess.hpp"
#include "rfcmp/rf_preconditioner.hpp"
#include "rfcmp/run_config.hpp"

namespace rfcmp {

enum class Formulation { kNone, kLoopStar, kRfCmpTheory, kRfCmpImpl };

inline Formulation parse_formulation(const std::string& s) {
  if (s == "none") return Formulation::kNone;
  if (s == "loop-star") return Formulation::kLoopStar;
  if (s == "rfcmp-theory") return Formulation::kRfCmpTheory;
  if (s == "rfcmp-impl") return Formulation::kRfCmpImpl;
  throw ConfigError("unknown formulation '" + s + "'");
}

inline std::string formulation_name(Formulation f) {
  switch (f) {
    case Formulation::kNone: return "none";
    case Formulation::kLoopStar: return "loop-star";
    case Formulation::kRfCmpTheory: return "rfcmp-theory";
    case Formulation::kRfCmpImpl: return "rfcmp-impl";
  }
  return "?";
}

inline bool is_rfcmp(Formulation f) { return f == Formulation::kRfCmpTheory || f == Formulation::kRfCmpImpl; }

inline double wavenumber_from_frequency(double f) { return ScatteringScenario::from_frequency(f).wavenumber(); }

/// A mesh with its frequency-independent operators. The mesh is owned here so
/// the operators can keep referring to it.
struct Problem {
  std::shared_ptr<const TriangleMesh> mesh;
  std::shared_ptr<const MeshOperators> ops;
  int level = 0;

  static Problem build(TriangleMesh mesh, int level = 0, PinvOptions pinv = {}) {
    Problem p;
    p.mesh = std::make_shared<const TriangleMesh>(std::move(mesh));
    p.ops = std::make_shared<const MeshOperators>(*p.mesh, pinv);
    p.level = level;
    return p;
  }

  DynamicBlocks blocks(double k) const { return assemble_dynamic(*mesh, k, ops->static_cache()); }
  double spectral_index() const { return 1.0 / average_edge_length(*mesh); }
};

/// Mesh of the given level for a run configuration.
inline TriangleMesh mesh_for_level(const RunConfig& cfg, int level) {
  if (cfg.mesh == "sphere") return make_sphere(cfg.radius, level);
  TriangleMesh m = cfg.mesh == "torus"
                       ? make_torus(cfg.torus_major, cfg.torus_minor, cfg.torus_n_major, cfg.torus_n_minor)
                       : load_mesh(cfg.mesh_path);
  for (int i = 0; i < level; ++i) m = refine_structured(m);
  return m;
}

/// Loop-star system with one loop and one star dropped, rows and columns
/// rescaled so that no block depends on 1/k:
///   [ L'^T T_A L'          ik L'^T T_A S'                   ]
///   [ ik S'^T T_A L'       (ik)^2 S'^T T_A S' + S'^T T_Phi S' ]
/// On surfaces of genus g the basis misses the 2g harmonic directions.
inline ComplexMatrix loop_star_matrix(const MeshOperators& ops, const DynamicBlocks& blocks) {
  const Index nv = ops.mesh().n_vertices(), nc = ops.mesh().n_cells();
  const SparseRealMatrix lp = ops.lambda().leftCols(nv - 1);
  const SparseRealMatrix sp = ops.sigma().leftCols(nc - 1);
  const Complex ik(0.0, blocks.k);
  const ComplexMatrix tl = blocks.t_a * lp;
  const ComplexMatrix ts = blocks.t_a * sp;
  const SparseRealMatrix sts = SparseRealMatrix(ops.sigma().transpose() * sp);  // Sigma^T S'
  ComplexMatrix m(nv - 1 + nc - 1, nv - 1 + nc - 1);
  m.topLeftCorner(nv - 1, nv - 1) = lp.transpose() * tl;
  m.topRightCorner(nv - 1, nc - 1) = ik * (lp.transpose() * ts);
  m.bottomLeftCorner(nc - 1, nv - 1) = ik * (sp.transpose() * tl);
  const ComplexMatrix vs = blocks.v * sts;
  m.bottomRightCorner(nc - 1, nc - 1) = (ik * ik) * (sp.transpose() * ts) + sts.transpose() * vs;
  return m;
}

/// Dense system matrix of a formulation at one frequency.
inline ComplexMatrix formulation_matrix(const Problem& p, const DynamicBlocks& blocks, Formulation f,
                                        const PowerIterationOptions& power = {}) {
  switch (f) {
    case Formulation::kNone: return assemble_T(*p.mesh, blocks);
    case Formulation::kLoopStar: return loop_star_matrix(*p.ops, blocks);
    case Formulation::kRfCmpTheory:
    case Formulation::kRfCmpImpl: {
      const RfCmpOperator op(p.ops, blocks,
                             f == Formulation::kRfCmpTheory ? RfCmpForm::kTheory : RfCmpForm::kImplementation, power);
      return op.system_operator().materialize();
    }
  }
  throw ConfigError("unknown formulation");
}

/// 2-norm condition number; the Hermitian RF-CMP systems use eigenvalues.
inline double formulation_condition(const Problem& p, const DynamicBlocks& blocks, Formulation f, Index cap = 3000,
                                    const PowerIterationOptions& power = {}) {
  const Index n = f == Formulation::kLoopStar ? p.mesh->n_vertices() + p.mesh->n_cells() - 2 : p.mesh->n_edges();
  if (n > cap) throw ConfigError("system size " + std::to_string(n) + " exceeds the dense cap " + std::to_string(cap));
  const ComplexMatrix m = formulation_matrix(p, blocks, f, power);
  return is_rfcmp(f) ? hermitian_condition(m, cap) : dense_condition(m, cap);
}

struct SpectrumRow {
  int mesh_level = 0;
  Index n_unknowns = 0;
  double spectral_index = 0.0;
  double frequency_hz = 0.0;
  std::string formulation;
  double condition_number = 0.0;
  std::string status = "ok";
};

inline std::string spectrum_csv_header() {
  return "mesh_level,n_unknowns,spectral_index,frequency_hz,formulation,condition_number,status";
}

inline std::string spectrum_csv_row(const SpectrumRow& r) {
  std::ostringstream os;
  os << std::setprecision(10) << r.mesh_level << ',' << r.n_unknowns << ',' << r.spectral_index << ','
     << r.frequency_hz << ',' << r.formulation << ',' << r.condition_number << ',' << r.status;
  return os.str();
}

/// Condition numbers for every (level, frequency, formulation). Failures are
/// recorded in the row status and the sweep continues.
inline std::vector<SpectrumRow> run_spectrum(const RunConfig& cfg) {
  std::vector<SpectrumRow> rows;
  PowerIterationOptions power;
  power.seed = cfg.seed;
  for (int level : cfg.levels) {
    const Problem p = Problem::build(mesh_for_level(cfg, level), level);
    const double si = p.spectral_index();
    for (double f : cfg.frequencies) {
      const DynamicBlocks blocks = p.blocks(wavenumber_from_frequency(f));
      for (const auto& name : cfg.formulations) {
        SpectrumRow row;
        row.mesh_level = level;
        row.n_unknowns = p.mesh->n_edges();
        row.spectral_index = si;
        row.frequency_hz = f;
        row.formulation = name;
        try {
          row.condition_number = formulation_condition(p, blocks, parse_formulation(name), cfg.dense_cap, power);
        } catch (const ConfigError& e) {
          row.status = "skipped: " + std::string(e.what());
        } catch (const Error& e) {
          row.status = "failed: " + std::string(e.what());
        }
        for (char& c : row.status)
          if (c == ',') c = ';';
        rows.push_back(row);
      }
    }
  }
  return rows;
}

struct SolveOutcome {
  std::string formulation;
  std::string solver;
  SolveReport report;
  CurrentSolution current;
  double condition_number = 0.0;  // filled on request
  std::string status = "ok";
};

inline Excitation make_excitation(const RunConfig& cfg, const TriangleMesh& mesh, double k) {
  if (cfg.excitation == "voltage-gap") return excitation_voltage_gap(mesh, cfg.gap_edge);
  return excitation_planewave(mesh, Vec3(0, 0, 1), Vec3(1, 0, 0), k, 1.0);
}

/// Solves T j = -e with the chosen formulation and Krylov method.
inline SolveOutcome solve_formulation(const Problem& p, const DynamicBlocks& blocks, Formulation f,
                                      const std::string& solver, const Excitation& e, double tol, int maxit,
                                      const PowerIterationOptions& power = {}) {
  if (solver == "cg" && !is_rfcmp(f)) throw ConfigError("cg is only valid for the Hermitian RF-CMP systems");
  if (solver != "cg" && solver != "cgs") throw ConfigError("unknown solver '" + solver + "'");
  SolveOutcome out;
  out.formulation = formulation_name(f);
  out.solver = solver;
  const TriangleMesh& mesh = *p.mesh;
  auto run = [&](const ComplexOperator& op, const ComplexVector& rhs) {
    return solver == "cg" ? cg_solve(op, rhs, tol, maxit) : cgs_solve(op, rhs, tol, maxit);
  };
  if (is_rfcmp(f)) {
    const RfCmpOperator op(p.ops, blocks,
                           f == Formulation::kRfCmpTheory ? RfCmpForm::kTheory : RfCmpForm::kImplementation, power);
    auto res = run(op.system_operator(), op.build_rhs(e));
    out.report = res.report;
    out.current = op.recover_current(res.solution);
  } else if (f == Formulation::kNone) {
    const ComplexMatrix t = assemble_T(mesh, blocks);
    auto res = run(ComplexOperator::from_matrix(t), ComplexVector(-e.full(mesh)));
    out.report = res.report;
    out.current.loop = res.solution;
    out.current.star = ComplexVector::Zero(mesh.n_edges());
    out.current.charge = p.ops->sigma().transpose() * res.solution;
  } else {
    const Index nv = mesh.n_vertices(), nc = mesh.n_cells();
    const SparseRealMatrix lp = p.ops->lambda().leftCols(nv - 1);
    const SparseRealMatrix sp = p.ops->sigma().leftCols(nc - 1);
    const Complex ik(0.0, blocks.k);
    // Lambda^T Sigma = 0, so the cell part of e never reaches the loop rows
    ComplexVector rhs(nv - 1 + nc - 1);
    rhs.head(nv - 1) = -(lp.transpose() * e.general);
    const ComplexVector se = e.general + ComplexVector(p.ops->sigma() * e.star);
    rhs.tail(nc - 1) = -ik * (sp.transpose() * se);
    auto res = run(ComplexOperator::from_matrix(loop_star_matrix(*p.ops, blocks)), rhs);
    out.report = res.report;
    out.current.loop = (lp * res.solution.head(nv - 1)) / ik;
    out.current.star = sp * res.solution.tail(nc - 1);
    out.current.charge = p.ops->sigma().transpose() * out.current.star;
  }
  if (!out.report.converged) out.status = "not converged";
  return out;
}

struct RcsRow {
  double theta_deg;
  double mom_dbsm;
  double mie_dbsm;
  double abs_err_db;
};

inline std::string rcs_csv_header() { return "theta_deg,rcs_dbsm_mom,rcs_dbsm_mie,abs_err_db"; }

inline std::string rcs_csv(const std::vector<RcsRow>& rows) {
  std::ostringstream os;
  os << rcs_csv_header() << '\n' << std::setprecision(10);
  for (const auto& r : rows) os << r.theta_deg << ',' << r.mom_dbsm << ',' << r.mie_dbsm << ',' << r.abs_err_db << '\n';
  return os.str();
}

/// E-plane bistatic RCS of a solved sphere current next to the Mie series.
/// Returns the rows and the relative L2 error (percent, linear sigma).
inline std::pair<std::vector<RcsRow>, double> rcs_versus_mie(const TriangleMesh& mesh, const CurrentSolution* j,
                                                             double k, double radius, double step_deg = 1.0) {
  const auto theta = degree_grid(0.0, 180.0, step_deg);
  const auto mie = mie_rcs(radius, k, theta);
  std::vector<double> mom(theta.size(), std::numeric_limits<double>::quiet_NaN());
  double err = std::numeric_limits<double>::quiet_NaN();
  if (j) {
    mom = far_field_cut(mesh, *j, k, theta, 0.0).sigma;
    err = l2_relative_error(mom, mie);
  }
  std::vector<RcsRow> rows;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double a = j ? to_dbsm(mom[i]) : std::numeric_limits<double>::quiet_NaN();
    const double b = to_dbsm(mie[i]);
    rows.push_back({theta[i] * 180.0 / kPi, a, b, j ? std::abs(a - b) : std::numeric_limits<double>::quiet_NaN()});
  }
  return {rows, err};
}

}  // namespace rfcmp
