// Command-line front end: soliton profiles, evolution runs, modulation of
// checkpoints, linearized-spectrum reports, multi-soliton constructions, and
// report aggregation over a run directory.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "bqlab/builder.hpp"
#include "bqlab/checkpoint.hpp"
#include "bqlab/config.hpp"
#include "bqlab/errors.hpp"
#include "bqlab/evolution.hpp"
#include "bqlab/functionals.hpp"
#include "bqlab/modulation.hpp"
#include "bqlab/soliton.hpp"
#include "bqlab/spectrum.hpp"

namespace fs = std::filesystem;
using namespace bqlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBlowup = 3;

GridPtr grid_from(const RunConfig& cfg, const SolitonFamily& fam, double horizon) {
  if (cfg.grid_half_length && cfg.grid_n)
    return make_grid(*cfg.grid_half_length, *cfg.grid_n);
  return suggested_grid_ptr(fam, horizon);
}

std::string run_dir(const RunConfig& cfg) {
  fs::path dir = cfg.output_dir.empty()
                     ? fs::path(output_root()) / "bqlab_run"
                     : fs::path(output_root()) / cfg.output_dir;
  fs::create_directories(dir);
  return dir.string();
}

int cmd_soliton(double p, double omega, double x0,
                const std::string& out_csv) {
  SolitonParams s{p, omega, x0};
  s.validate();
  GridSpec spec = suggested_grid(p, {s}, 0.0);
  auto g = make_grid(spec.half_length, spec.n_points);
  const double resid = elliptic_residual(s, *g);
  std::cout << "p = " << p << ", omega = " << omega << ", grid L = "
            << spec.half_length << ", n = " << spec.n_points << "\n";
  std::cout << "elliptic_residual = " << resid << "\n";
  if (!out_csv.empty()) {
    auto [phi, psi] = scaled_soliton(s, g->x());
    std::ofstream f(out_csv);
    f.precision(15);
    f << "x,phi,psi\n";
    for (int i = 0; i < g->n_points(); ++i)
      f << g->x()[i] << ',' << phi[i] << ',' << psi[i] << "\n";
  }
  return kExitOk;
}

int cmd_evolve(const std::string& config_path, double t0, double t_end,
               bool backward, const std::string& from) {
  RunConfig cfg = RunConfig::parse_file(config_path);
  SolitonFamily fam = cfg.family();
  const double horizon = std::max(std::abs(t_end), std::abs(t0));
  GridPtr grid = grid_from(cfg, fam, horizon);

  FieldState initial = from.empty()
                           ? soliton_sum(fam, grid, backward ? t_end : t0)
                           : load_state(from);
  EvolveConfig ecfg;
  ecfg.dt = cfg.dt.value_or(0.0);
  ecfg.t_end = t_end;
  ecfg.nonlinearity_p = cfg.p;
  ecfg.dealias = cfg.dealias;

  Trajectory traj = backward ? evolve_backward_from_final(initial, t0, ecfg)
                             : evolve(initial, ecfg);

  const std::string dir = run_dir(cfg);
  save_states(dir + "/trajectory.bqck", traj.states);
  {
    std::ofstream f(dir + "/config.txt");
    f << cfg.to_text();
  }
  std::ofstream csv(dir + "/conservation.csv");
  csv.precision(15);
  csv << "t,energy,momentum";
  const bool localized = fam.size() > 1;
  CutoffSystem cut = CutoffSystem::make(fam);
  if (localized)
    for (int j = 1; j <= fam.size(); ++j) csv << ",m" << j;
  csv << "\n";
  for (const auto& s : traj.states) {
    csv << s.time << ',' << energy(s, cfg.p) << ',' << momentum(s);
    if (localized && s.time > 0) {
      FunctionalReport rep = localized_functionals(s, fam, cut, cfg.p);
      for (double mj : rep.localized_momenta) csv << ',' << mj;
    } else if (localized) {
      for (int j = 0; j < fam.size(); ++j) csv << ',';
    }
    csv << "\n";
  }
  std::cout << "evolved " << traj.steps << " steps (dt = " << traj.dt_used
            << "), checkpoints: " << traj.states.size() << "\n"
            << "outputs in " << dir << "\n";
  return kExitOk;
}

int cmd_modulate(const std::string& config_path, const std::string& checkpoint,
                 bool supercritical) {
  RunConfig cfg = RunConfig::parse_file(config_path);
  SolitonFamily fam = cfg.family();
  FieldState state = load_state(checkpoint);
  ModulationDecomposition d =
      modulate(state, fam,
               supercritical ? ModulationMode::supercritical
                             : ModulationMode::subcritical);
  std::cout.precision(12);
  std::cout << "t = " << state.time << ", newton_iterations = "
            << d.newton_iterations << "\n";
  for (int j = 0; j < fam.size(); ++j)
    std::cout << "soliton " << j + 1 << ": omega_tilde = " << d.tilde_omegas[j]
              << ", x_tilde = " << d.tilde_positions[j] << "\n";
  std::cout << "eps_h = " << h_norm(d.epsilon) << "\n";
  double worst = 0;
  for (double r : d.ortho_residuals) worst = std::max(worst, std::abs(r));
  std::cout << "max_ortho_residual = " << worst << "\n";
  return kExitOk;
}

int cmd_spectrum(double p, double omega, std::optional<double> L,
                 std::optional<int> n, bool with_modes,
                 const std::string& out_csv) {
  SolitonParams s{p, omega, 0.0};
  s.validate();
  GridSpec spec = (L && n) ? GridSpec{*L, *n} : suggested_grid(p, {s}, 0.0);
  auto g = make_grid(spec.half_length, spec.n_points);
  OperatorAssembly A = assemble_linearized(p, omega, g);
  SpectrumReport rep = certify_spectrum(A);
  std::cout << to_text(rep);
  if (with_modes) {
    auto m = compute_pw_modes(A);
    if (m) {
      std::cout << "unstable_mode: yes\n"
                << "lambda0_growth: " << m->lambda0 << "\n"
                << "mode_residual: " << m->eigen_residual << "\n"
                << "tail_decay: " << fit_tail_decay(*g, m->yp1) << "\n";
    } else {
      std::cout << "unstable_mode: no\n";
    }
  }
  if (!out_csv.empty()) {
    const bool fresh = !fs::exists(out_csv);
    std::ofstream f(out_csv, std::ios::app);
    if (fresh) f << csv_header_spectrum() << "\n";
    f << csv_row_spectrum(rep) << "\n";
  }
  return kExitOk;
}

int cmd_multisoliton(const std::string& config_path) {
  RunConfig cfg = RunConfig::parse_file(config_path);
  SolitonFamily fam = cfg.family();
  if (cfg.final_times.empty())
    throw ConfigError("multisoliton: construction.final_times is required");

  BuildConfig bcfg;
  bcfg.dt = cfg.dt.value_or(0.0);
  if (cfg.grid_half_length && cfg.grid_n) {
    bcfg.grid_half_length_override = *cfg.grid_half_length;
    bcfg.grid_n_override = *cfg.grid_n;
  }

  ConstructionRun run;
  if (fam.regime == Regime::subcritical) {
    run = build_subcritical(fam, cfg.t0, cfg.final_times, bcfg);
  } else {
    GridPtr grid = grid_from(cfg, fam, cfg.final_times.back());
    std::vector<PegoWeinsteinModes> modes;
    for (const auto& s : fam.solitons) {
      OperatorAssembly A = assemble_linearized(fam.p, s.omega, grid);
      auto m = compute_pw_modes(A);
      if (!m)
        throw CertificationError(
            "multisoliton: no unstable mode found for omega = " +
            std::to_string(s.omega));
      modes.push_back(*m);
    }
    bcfg.grid_half_length_override = grid->half_length();
    bcfg.grid_n_override = grid->n_points();
    run = build_supercritical(fam, cfg.t0, cfg.final_times, bcfg,
                              ShootConfig{}, modes);
  }

  const std::string dir = run_dir(cfg);
  write_construction_csv(run, dir);
  {
    std::ofstream f(dir + "/config.txt");
    f << cfg.to_text();
  }
  std::ofstream man(dir + "/manifest.txt");
  man.precision(15);
  man << "regime: "
      << (fam.regime == Regime::subcritical ? "subcritical" : "supercritical")
      << "\n"
      << "grid_half_length: " << run.grid->half_length() << "\n"
      << "grid_n: " << run.grid->n_points() << "\n"
      << "dt: " << run.dt << "\n"
      << "omega_star: " << run.family.omega_star << "\n"
      << "failed: " << (run.failed ? "yes" : "no") << "\n";
  if (run.failed)
    man << "failed_at: " << run.failed_at << "\n"
        << "failure_time: " << run.failure_time << "\n"
        << "failure_reason: " << run.failure_reason << "\n";
  for (size_t i = 0; i < run.cauchy_series.size(); ++i)
    man << "cauchy_" << i + 1 << ": " << run.cauchy_series[i] << "\n";
  for (size_t i = 0; i < run.shoot_objectives.size(); ++i)
    man << "shoot_objective_" << i << ": " << run.shoot_objectives[i] << "\n";

  std::cout << "construction written to " << dir << "\n";
  if (run.failed) {
    std::cout << "run failed at index " << run.failed_at << " (t = "
              << run.failure_time << "): " << run.failure_reason << "\n";
    return kExitBlowup;
  }
  for (size_t i = 0; i < run.cauchy_series.size(); ++i)
    std::cout << "cauchy difference " << i + 1 << ": " << run.cauchy_series[i]
              << "\n";
  return kExitOk;
}

// Scan a run directory for conservation and manifest files; each check prints
// one pass/fail line.
int cmd_report(const std::string& dir) {
  int checks = 0, failures = 0;
  auto verdict = [&](const std::string& name, bool ok, const std::string& detail) {
    ++checks;
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
  };

  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const std::string path = entry.path().string();
    if (entry.path().filename() == "conservation.csv") {
      std::ifstream f(path);
      std::string line;
      std::getline(f, line);  // header
      double e0 = 0, m0 = 0, emax = 0, mmax = 0;
      bool first = true;
      while (std::getline(f, line)) {
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        std::getline(row, cell, ',');
        const double e = std::stod(cell);
        std::getline(row, cell, ',');
        const double m = std::stod(cell);
        if (first) {
          e0 = e;
          m0 = m;
          first = false;
        }
        emax = std::max(emax, std::abs(e - e0));
        mmax = std::max(mmax, std::abs(m - m0));
      }
      verdict("energy_conservation " + path,
              emax <= 1e-8 * std::max(1.0, std::abs(e0)),
              "drift " + std::to_string(emax));
      verdict("momentum_conservation " + path,
              mmax <= 1e-8 * (1.0 + std::abs(m0)),
              "drift " + std::to_string(mmax));
    } else if (entry.path().filename() == "manifest.txt") {
      std::ifstream f(path);
      std::string line;
      bool failed = false;
      std::vector<double> cauchy;
      while (std::getline(f, line)) {
        if (line == "failed: yes") failed = true;
        if (line.rfind("cauchy_", 0) == 0)
          cauchy.push_back(std::stod(line.substr(line.find(':') + 1)));
      }
      verdict("construction_completed " + path, !failed, "");
      if (cauchy.size() >= 2) {
        bool decreasing = true;
        for (size_t i = 0; i + 1 < cauchy.size(); ++i)
          if (cauchy[i + 1] >= cauchy[i]) decreasing = false;
        verdict("cauchy_strictly_decreasing " + path, decreasing, "");
      }
    }
  }
  if (checks == 0) {
    std::cout << "no conservation.csv or manifest.txt under " << dir << "\n";
    return kExitUsage;
  }
  std::cout << checks << " checks, " << failures << " failures\n";
  return failures == 0 ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for solitary waves of the 1d good "
               "Boussinesq system"};
  app.require_subcommand(1);

  double p = 1.0, omega = 0.0, x0 = 0.0;
  double t0 = 0.0, t_end = 10.0;
  std::string config_path, checkpoint_path, out_csv, from, dir;
  bool backward = false, supercritical = false, with_modes = false;
  std::optional<double> grid_L;
  std::optional<int> grid_n;

  auto* soliton = app.add_subcommand("soliton", "profile and residual");
  soliton->add_option("--p", p, "nonlinearity exponent")->required();
  soliton->add_option("--omega", omega, "wave speed, |omega| < 1")->required();
  soliton->add_option("--x0", x0, "initial center");
  soliton->add_option("--out", out_csv, "profile samples CSV");

  auto* evolve_cmd = app.add_subcommand("evolve", "integrate the system");
  evolve_cmd->add_option("--config", config_path)->required();
  evolve_cmd->add_option("--t0", t0, "start (or backward target) time");
  evolve_cmd->add_option("--t-end", t_end, "final time")->required();
  evolve_cmd->add_flag("--backward", backward, "solve the final-value problem");
  evolve_cmd->add_option("--from", from, "initial/final state checkpoint");

  auto* modulate_cmd = app.add_subcommand("modulate", "decompose a checkpoint");
  modulate_cmd->add_option("--config", config_path)->required();
  modulate_cmd->add_option("--checkpoint", checkpoint_path)->required();
  modulate_cmd->add_flag("--supercritical", supercritical,
                         "positions-only decomposition");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "linearized operator report");
  spectrum_cmd->add_option("--p", p)->required();
  spectrum_cmd->add_option("--omega", omega)->required();
  spectrum_cmd->add_option("--L", grid_L, "grid half length");
  spectrum_cmd->add_option("--n", grid_n, "grid points");
  spectrum_cmd->add_flag("--pw", with_modes, "also compute the unstable pair");
  spectrum_cmd->add_option("--csv", out_csv, "append a sweep row");

  auto* multi = app.add_subcommand("multisoliton", "backward construction");
  multi->add_option("--config", config_path)->required();

  auto* report = app.add_subcommand("report", "aggregate run directories");
  report->add_option("--dir", dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (soliton->parsed()) return cmd_soliton(p, omega, x0, out_csv);
    if (evolve_cmd->parsed())
      return cmd_evolve(config_path, t0, t_end, backward, from);
    if (modulate_cmd->parsed())
      return cmd_modulate(config_path, checkpoint_path, supercritical);
    if (spectrum_cmd->parsed())
      return cmd_spectrum(p, omega, grid_L, grid_n, with_modes, out_csv);
    if (multi->parsed()) return cmd_multisoliton(config_path);
    if (report->parsed()) return cmd_report(dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BlowupError& e) {
    std::cerr << "numerical blowup at t = " << e.time << ": " << e.what()
              << "\n";
    return kExitBlowup;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitUsage;
}
