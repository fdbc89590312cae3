#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rfcmp.hpp"

using namespace rfcmp;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void write_table(const RunConfig& cfg, const std::string& name, const std::string& table, const std::string& body) {
  write_text(out_path(cfg, name), csv_preamble(table, cfg.timestamp) + body);
}

std::string tag(int level, std::size_t fi) { return "L" + std::to_string(level) + "_f" + std::to_string(fi); }

int cmd_mesh_info(const RunConfig& cfg) {
  std::ostringstream os;
  os << "mesh_level," << MeshStatistics::csv_header() << '\n';
  for (int level : cfg.levels) os << level << ',' << mesh_statistics(mesh_for_level(cfg, level)).csv_row() << '\n';
  std::cout << os.str();
  write_table(cfg, "mesh_info.csv", "mesh_info", os.str());
  return kOk;
}

int cmd_spectrum(const RunConfig& cfg) {
  const auto rows = run_spectrum(cfg);
  std::ostringstream os;
  os << spectrum_csv_header() << '\n';
  for (const auto& r : rows) {
    os << spectrum_csv_row(r) << '\n';
    std::cout << spectrum_csv_row(r) << std::endl;
  }
  write_table(cfg, "spectrum.csv", "spectrum", os.str());
  return kOk;
}

std::string current_csv(const CurrentSolution& j) {
  std::ostringstream os;
  os << "edge,re,im\n" << std::setprecision(17);
  const ComplexVector t = j.total();
  for (Index n = 0; n < t.size(); ++n) os << n << ',' << t[n].real() << ',' << t[n].imag() << '\n';
  return os.str();
}

int cmd_solve(const RunConfig& cfg) {
  const Formulation f = parse_formulation(cfg.preconditioner);
  PowerIterationOptions power;
  power.seed = cfg.seed;
  std::ostringstream report;
  report << "mesh_level,n_unknowns,frequency_hz,formulation,solver,iterations,matvec_count,final_residual,converged,"
            "wall_time_s,status\n"
         << std::setprecision(10);
  bool all_converged = true;
  for (int level : cfg.levels) {
    const Problem p = Problem::build(mesh_for_level(cfg, level), level);
    for (std::size_t fi = 0; fi < cfg.frequencies.size(); ++fi) {
      const double hz = cfg.frequencies[fi];
      const double k = wavenumber_from_frequency(hz);
      const Excitation e = make_excitation(cfg, *p.mesh, k);
      SolveOutcome out;
      out.formulation = cfg.preconditioner;
      out.solver = cfg.solver;
      try {
        out = solve_formulation(p, p.blocks(k), f, cfg.solver, e, cfg.tolerance, cfg.max_iterations, power);
      } catch (const NumericalError& err) {
        out.status = std::string("failed: ") + err.what();
      }
      for (char& c : out.status)
        if (c == ',') c = ';';
      all_converged = all_converged && out.status == "ok";
      report << level << ',' << p.mesh->n_edges() << ',' << hz << ',' << out.formulation << ',' << out.solver << ','
             << out.report.iterations << ',' << out.report.matvec_count << ',' << out.report.final_residual() << ','
             << (out.report.converged ? 1 : 0) << ',' << out.report.wall_time << ',' << out.status << '\n';
      std::cout << "level " << level << " f=" << hz << " Hz: " << out.report.iterations << " iterations, residual "
                << out.report.final_residual() << " (" << out.status << ")" << std::endl;
      write_table(cfg, "residual_" + tag(level, fi) + ".csv", "residual", residual_csv(out.report));
      if (out.current.loop.size() == p.mesh->n_edges())
        write_table(cfg, "current_" + tag(level, fi) + ".csv", "current", current_csv(out.current));
    }
  }
  write_table(cfg, "solve_report.csv", "solve_report", report.str());
  return all_converged ? kOk : kNumerical;
}

int cmd_rcs(const RunConfig& cfg) {
  if (cfg.mesh != "sphere") throw ConfigError("rcs compares against the Mie series and needs mesh=sphere");
  if (cfg.mie_only) {
    const auto freqs = cfg.frequencies.empty() ? std::vector<double>{1e6} : cfg.frequencies;
    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
      const auto mie = mie_rcs(cfg.radius, wavenumber_from_frequency(freqs[fi]), degree_grid(0, 180, cfg.theta_step_deg));
      std::ostringstream os;
      os << "theta_deg,rcs_dbsm_mie\n" << std::setprecision(10);
      for (std::size_t i = 0; i < mie.size(); ++i) os << i * cfg.theta_step_deg << ',' << to_dbsm(mie[i]) << '\n';
      write_table(cfg, "mie_f" + std::to_string(fi) + ".csv", "mie", os.str());
    }
    return kOk;
  }
  const Formulation f = parse_formulation(cfg.preconditioner);
  PowerIterationOptions power;
  power.seed = cfg.seed;
  int code = kOk;
  for (int level : cfg.levels) {
    const Problem p = Problem::build(mesh_for_level(cfg, level), level);
    for (std::size_t fi = 0; fi < cfg.frequencies.size(); ++fi) {
      const double k = wavenumber_from_frequency(cfg.frequencies[fi]);
      const Excitation e = excitation_planewave(*p.mesh, Vec3(0, 0, 1), Vec3(1, 0, 0), k, 1.0);
      const SolveOutcome out =
          solve_formulation(p, p.blocks(k), f, cfg.solver, e, cfg.tolerance, cfg.max_iterations, power);
      if (!out.report.converged) code = kNumerical;
      const auto [rows, err] = rcs_versus_mie(*p.mesh, &out.current, k, cfg.radius, cfg.theta_step_deg);
      write_table(cfg, "rcs_" + tag(level, fi) + ".csv", "rcs", rcs_csv(rows));
      std::cout << "level " << level << " f=" << cfg.frequencies[fi] << " Hz: " << out.report.iterations
                << " iterations, l2 error vs Mie " << err << " %" << std::endl;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EFIE solver with a refinement-free Calderon preconditioner"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "key=value configuration file");
  app.add_option("-s,--set", overrides, "override a configuration key (key=value), repeatable");
  app.add_subcommand("mesh-info", "mesh counts, genus and edge lengths per level");
  app.add_subcommand("spectrum", "dense condition numbers per formulation and frequency");
  app.add_subcommand("solve", "Krylov solve with residual histories and currents");
  app.add_subcommand("rcs", "bistatic RCS of the sphere against the Mie series");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());

    if (cfg.command == "mesh-info") return cmd_mesh_info(cfg);
    if (cfg.command == "spectrum") return cmd_spectrum(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    return cmd_rcs(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
