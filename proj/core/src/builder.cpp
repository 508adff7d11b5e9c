#include "bqlab/builder.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "bqlab/errors.hpp"
#include "bqlab/functionals.hpp"

namespace bqlab {

namespace {

constexpr double kTimeQuantum = 0.5;  // all spans snap to this granularity

bool is_multiple_of_quantum(double span) {
  const double q = span / kTimeQuantum;
  return std::abs(q - std::round(q)) < 1e-9;
}

void validate_times(double t0, const std::vector<double>& final_times) {
  if (final_times.empty())
    throw ContractError("builder: needs at least one final time");
  double prev = t0;
  for (double T : final_times) {
    if (!(T > prev))
      throw ContractError("builder: final times must be strictly increasing "
                          "and exceed t0");
    if (!is_multiple_of_quantum(T - t0))
      throw ContractError("builder: spans must be multiples of 0.5");
    prev = T;
  }
}

GridPtr build_grid(const SolitonFamily& family, double horizon,
                   const BuildConfig& cfg) {
  if (cfg.grid_n_override > 0 && cfg.grid_half_length_override > 0)
    return make_grid(cfg.grid_half_length_override, cfg.grid_n_override);
  return suggested_grid_ptr(family, horizon);
}

// A step that divides the checkpoint quantum exactly, so every run in a
// construction shares one discrete flow map and lands on t0.
double snapped_dt(const Grid& grid, const BuildConfig& cfg) {
  const double raw = cfg.dt > 0 ? cfg.dt : default_dt(grid);
  const long k = std::max<long>(1, std::lround(std::ceil(kTimeQuantum / raw)));
  return kTimeQuantum / static_cast<double>(k);
}

EvolveConfig make_evolve_cfg(const SolitonFamily& family, double dt,
                             const BuildConfig& cfg) {
  EvolveConfig e;
  e.dt = dt;
  e.nonlinearity_p = family.p;
  e.dealias = cfg.dealias;
  e.checkpoint_stride =
      static_cast<int>(std::max<long>(1, std::lround(cfg.checkpoint_dt / dt)));
  return e;
}

ModulationRow make_row(const ModulationDecomposition& d) {
  ModulationRow row;
  row.time = d.epsilon.time;
  row.eps_norm = h_norm(d.epsilon);
  for (double v : d.ortho_residuals)
    row.max_ortho = std::max(row.max_ortho, std::abs(v));
  row.tilde_omegas = d.tilde_omegas;
  row.tilde_positions = d.tilde_positions;
  return row;
}

// Backward-growing correction mode of soliton j carried onto `grid` and
// centered on the soliton at time T.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> correction_mode(
    const PegoWeinsteinModes& m, const SolitonParams& s, const Grid& grid,
    double T) {
  Eigen::ArrayXd a = m.ym1, b = m.ym2;
  if (!(*m.grid == grid)) {
    a = resample(*m.grid, a, grid);
    b = resample(*m.grid, b, grid);
  }
  const double center = s.omega * T + s.x0;
  return {translate(grid, a, center), translate(grid, b, center)};
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> extractor_mode(
    const PegoWeinsteinModes& m, const SolitonParams& s, const Grid& grid,
    double T) {
  Eigen::ArrayXd a = m.zp1, b = m.zp2;
  if (!(*m.grid == grid)) {
    a = resample(*m.grid, a, grid);
    b = resample(*m.grid, b, grid);
  }
  const double center = s.omega * T + s.x0;
  return {translate(grid, a, center), translate(grid, b, center)};
}

}  // namespace

ConstructionRun build_subcritical(const SolitonFamily& family, double t0,
                                  const std::vector<double>& final_times,
                                  const BuildConfig& cfg) {
  if (family.regime != Regime::subcritical)
    throw ContractError("build_subcritical: family must have p < 2");
  validate_times(t0, final_times);

  ConstructionRun run;
  run.family = family;
  run.t0 = t0;
  run.final_times = final_times;
  run.grid = build_grid(family, final_times.back(), cfg);
  run.dt = snapped_dt(*run.grid, cfg);
  EvolveConfig ecfg = make_evolve_cfg(family, run.dt, cfg);

  for (size_t i = 0; i < final_times.size(); ++i) {
    const double T = final_times[i];
    FieldState final_state = soliton_sum(family, run.grid, T);
    std::vector<std::pair<double, double>> errors;
    std::vector<ModulationRow> mods;
    try {
      Trajectory traj = evolve_backward_from_final(final_state, t0, ecfg);
      for (const auto& s : traj.states) {
        errors.emplace_back(s.time, h_distance_to_sum(s, family));
        try {
          mods.push_back(make_row(modulate(s, family, ModulationMode::subcritical)));
        } catch (const OutOfBasinError&) {
        }
      }
      run.states_at_t0.push_back(traj.states.front());
      if (cfg.keep_trajectories) run.trajectories.push_back(std::move(traj.states));
    } catch (const BlowupError& e) {
      run.failed = true;
      run.failed_at = static_cast<int>(i);
      run.failure_time = e.time;
      run.failure_reason = e.what();
    }
    run.error_series.push_back(std::move(errors));
    run.modulation_series.push_back(std::move(mods));
  }
  for (size_t i = 0; i + 1 < run.states_at_t0.size(); ++i) {
    const auto& a = run.states_at_t0[i];
    const auto& b = run.states_at_t0[i + 1];
    run.cauchy_series.push_back(h_norm_pair(*run.grid, b.u1 - a.u1, b.u2 - a.u2));
  }
  return run;
}

namespace {

struct SuperTrial {
  std::vector<FieldState> states;
  std::vector<ModulationRow> rows;            // with gamma projections
  std::vector<std::pair<double, double>> errors;
  double objective = std::numeric_limits<double>::infinity();
  double literal_minus_max = 0;
  std::vector<double> gamma_at_T;             // controlled projection at T^n
  bool fully_in_basin = true;
};

SuperTrial run_supercritical_trial(
    const SolitonFamily& family, const std::vector<PegoWeinsteinModes>& modes,
    GridPtr grid, double t0, double T, const EvolveConfig& ecfg,
    const std::vector<double>& coeffs) {
  const int N = family.size();
  FieldState final_state = soliton_sum(family, grid, T);
  for (int j = 0; j < N; ++j) {
    if (coeffs[j] == 0.0) continue;
    auto [c1, c2] = correction_mode(modes[j], family.solitons[j], *grid, T);
    final_state.u1 += coeffs[j] * c1;
    final_state.u2 += coeffs[j] * c2;
  }

  SuperTrial trial;
  Trajectory traj = evolve_backward_from_final(final_state, t0, ecfg);
  const double ws32 = std::pow(family.omega_star, 1.5);
  double obj = 0;
  for (const auto& s : traj.states) {
    trial.errors.emplace_back(s.time, h_distance_to_sum(s, family));
    try {
      ModulationDecomposition d = modulate(s, family, ModulationMode::supercritical);
      UnstableProjections g = unstable_projections(d, family, modes);
      ModulationRow row = make_row(d);
      row.gamma_plus = g.plus;
      row.gamma_minus = g.minus;
      double np = 0, nm = 0;
      for (int j = 0; j < N; ++j) {
        np += g.plus[j] * g.plus[j];
        nm += g.minus[j] * g.minus[j];
      }
      const double w = std::exp(2.0 * ws32 * s.time);
      obj = std::max(obj, std::sqrt(np) * w);
      trial.literal_minus_max = std::max(trial.literal_minus_max, std::sqrt(nm) * w);
      if (s.time == traj.states.back().time) trial.gamma_at_T = g.plus;
      trial.rows.push_back(std::move(row));
    } catch (const OutOfBasinError&) {
      trial.fully_in_basin = false;
    }
  }
  trial.objective = trial.fully_in_basin && !trial.rows.empty()
                        ? obj
                        : std::numeric_limits<double>::infinity();
  trial.states = std::move(traj.states);
  return trial;
}

}  // namespace

ConstructionRun build_supercritical(const SolitonFamily& family, double t0,
                                    const std::vector<double>& final_times,
                                    const BuildConfig& cfg,
                                    const ShootConfig& shoot,
                                    const std::vector<PegoWeinsteinModes>& modes) {
  if (family.regime != Regime::supercritical)
    throw ContractError("build_supercritical: family must have p > 2");
  if (static_cast<int>(modes.size()) != family.size())
    throw ContractError("build_supercritical: one mode pair per soliton");
  validate_times(t0, final_times);

  ConstructionRun run;
  run.family = family;
  std::vector<double> rates;
  double max_rate = 0;
  for (const auto& m : modes) {
    rates.push_back(m.lambda0);
    max_rate = std::max(max_rate, m.lambda0);
  }
  run.family.tighten_omega_star(rates);

  run.t0 = t0;
  run.final_times = final_times;
  run.grid = build_grid(run.family, final_times.back(), cfg);
  run.dt = snapped_dt(*run.grid, cfg);
  EvolveConfig ecfg = make_evolve_cfg(run.family, run.dt, cfg);
  const int N = run.family.size();

  for (size_t i = 0; i < final_times.size(); ++i) {
    const double T = final_times[i];
    const double span = T - t0;
    const double probe = shoot.probe > 0
                             ? shoot.probe
                             : std::max(1e-12, 1e-3 * std::exp(-max_rate * span));

    std::vector<double> base(N, shoot.contamination);
    try {
      SuperTrial current =
          run_supercritical_trial(run.family, modes, run.grid, t0, T, ecfg, base);
      std::vector<double> alpha(N, 0.0);

      if (shoot.shoot && current.fully_in_basin) {
        // Measure the (affine) response of the controlled projections to each
        // correction coefficient, then damp them by weighted least squares.
        std::vector<SuperTrial> probes;
        for (int l = 0; l < N; ++l) {
          std::vector<double> c = base;
          c[l] += probe;
          probes.push_back(run_supercritical_trial(run.family, modes, run.grid,
                                                   t0, T, ecfg, c));
        }
        const double ws32 = std::pow(run.family.omega_star, 1.5);
        for (int outer = 0; outer < shoot.max_outer; ++outer) {
          const size_t rows_n = current.rows.size();
          bool aligned = true;
          for (int l = 0; l < N; ++l)
            if (probes[l].rows.size() != rows_n) aligned = false;
          if (!aligned) break;
          Eigen::MatrixXd G(rows_n * N, N);
          Eigen::VectorXd b(rows_n * N);
          for (size_t r = 0; r < rows_n; ++r) {
            const double w = std::exp(2.0 * ws32 * current.rows[r].time);
            for (int j = 0; j < N; ++j) {
              b[r * N + j] = w * current.rows[r].gamma_plus[j];
              for (int l = 0; l < N; ++l)
                G(r * N + j, l) =
                    w *
                    (probes[l].rows[r].gamma_plus[j] - current.rows[r].gamma_plus[j]) /
                    probe;
            }
          }
          Eigen::VectorXd delta =
              G.colPivHouseholderQr().solve(-b);
          std::vector<double> c(N);
          for (int l = 0; l < N; ++l) c[l] = base[l] + alpha[l] + delta[l];
          SuperTrial next =
              run_supercritical_trial(run.family, modes, run.grid, t0, T, ecfg, c);
          if (next.objective < current.objective) {
            for (int l = 0; l < N; ++l) alpha[l] += delta[l];
            current = std::move(next);
          } else {
            break;
          }
          if (current.objective < 1e-14) break;
        }
      }

      std::vector<double> total(N);
      for (int l = 0; l < N; ++l) total[l] = base[l] + alpha[l];
      run.alphas.push_back(total);
      run.a_minus.push_back(current.gamma_at_T);
      run.shoot_objectives.push_back(current.objective);
      run.literal_gamma_minus_max.push_back(current.literal_minus_max);
      run.error_series.push_back(current.errors);
      run.modulation_series.push_back(current.rows);
      run.states_at_t0.push_back(current.states.front());
      if (cfg.keep_trajectories) run.trajectories.push_back(std::move(current.states));
    } catch (const BlowupError& e) {
      run.failed = true;
      run.failed_at = static_cast<int>(i);
      run.failure_time = e.time;
      run.failure_reason = e.what();
      run.error_series.emplace_back();
      run.modulation_series.emplace_back();
      run.alphas.emplace_back();
      run.a_minus.emplace_back();
      run.shoot_objectives.push_back(std::numeric_limits<double>::infinity());
      run.literal_gamma_minus_max.push_back(0);
    }
  }
  for (size_t i = 0; i + 1 < run.states_at_t0.size(); ++i) {
    const auto& a = run.states_at_t0[i];
    const auto& b = run.states_at_t0[i + 1];
    run.cauchy_series.push_back(h_norm_pair(*run.grid, b.u1 - a.u1, b.u2 - a.u2));
  }
  return run;
}

DecayFit decay_fit(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 4)
    throw ContractError("decay_fit: needs at least 4 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(series.size());
  for (const auto& [t, e] : series) {
    if (!(e > 0)) throw ContractError("decay_fit: errors must be positive");
    sx += t;
    sy += std::log(e);
    sxx += t * t;
    sxy += t * std::log(e);
  }
  const double denom = n * sxx - sx * sx;
  DecayFit fit;
  const double slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
  fit.rate = -slope;
  fit.constant = std::exp((sy + fit.rate * sx) / n);
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (const auto& [t, e] : series) {
    const double pred = std::log(fit.constant) - fit.rate * t;
    ss_res += (std::log(e) - pred) * (std::log(e) - pred);
    ss_tot += (std::log(e) - mean) * (std::log(e) - mean);
  }
  fit.r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double measure_backward_growth_rate(const SolitonFamily& family,
                                    const PegoWeinsteinModes& modes,
                                    const BuildConfig& cfg) {
  if (family.size() != 1)
    throw ContractError("measure_backward_growth_rate: single soliton only");
  const double span =
      std::max(kTimeQuantum,
               kTimeQuantum * std::round(std::min(6.0 / modes.lambda0, 20.0) /
                                         kTimeQuantum));
  GridPtr grid = build_grid(family, span, cfg);
  const double dt = snapped_dt(*grid, cfg);
  EvolveConfig ecfg = make_evolve_cfg(family, dt, cfg);

  FieldState base = soliton_sum(family, grid, span);
  auto [c1, c2] = correction_mode(modes, family.solitons[0], *grid, span);
  const double delta =
      1e-6 * h_norm(base) / h_norm_pair(*grid, c1, c2);
  FieldState final_state = base;
  final_state.u1 += delta * c1;
  final_state.u2 += delta * c2;

  // The integrator's own drift projects weakly but measurably onto the mode
  // pair; differencing against an unseeded run isolates the seed's transport.
  Trajectory seeded = evolve_backward_from_final(final_state, 0.0, ecfg);
  Trajectory clean = evolve_backward_from_final(base, 0.0, ecfg);
  if (seeded.states.size() != clean.states.size())
    throw ConvergenceError("measure_backward_growth_rate: trajectory mismatch");
  std::vector<std::pair<double, double>> series;
  for (size_t i = 0; i < seeded.states.size(); ++i) {
    ModulationDecomposition ds =
        modulate(seeded.states[i], family, ModulationMode::supercritical);
    ModulationDecomposition dc =
        modulate(clean.states[i], family, ModulationMode::supercritical);
    UnstableProjections gs = unstable_projections(ds, family, {modes});
    UnstableProjections gc = unstable_projections(dc, family, {modes});
    const double mag = std::abs(gs.plus[0] - gc.plus[0]);
    if (mag > 1e-13) series.emplace_back(seeded.states[i].time, mag);
  }
  // The seed grows backward: magnitude decays with increasing t at the
  // eigensolve rate.
  return decay_fit(series).rate;
}

Eigen::MatrixXd finaldata_gram(const SolitonFamily& family,
                               const std::vector<PegoWeinsteinModes>& modes,
                               GridPtr grid, double T) {
  const int N = family.size();
  Eigen::MatrixXd G(N, N);
  std::vector<std::pair<Eigen::ArrayXd, Eigen::ArrayXd>> corr, extr;
  for (int j = 0; j < N; ++j) {
    corr.push_back(correction_mode(modes[j], family.solitons[j], *grid, T));
    extr.push_back(extractor_mode(modes[j], family.solitons[j], *grid, T));
  }
  for (int k = 0; k < N; ++k)
    for (int l = 0; l < N; ++l)
      G(k, l) = inner_pair(*grid, corr[l].first, corr[l].second,
                           extr[k].first, extr[k].second);
  return G;
}

void write_construction_csv(const ConstructionRun& run, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (size_t i = 0; i < run.error_series.size(); ++i) {
    std::ofstream f(dir + "/errors_n" + std::to_string(i) + ".csv");
    f.precision(15);
    f << "t,h_distance\n";
    for (const auto& [t, e] : run.error_series[i]) f << t << ',' << e << "\n";
  }
  for (size_t i = 0; i < run.modulation_series.size(); ++i) {
    std::ofstream f(dir + "/modulation_n" + std::to_string(i) + ".csv");
    f.precision(15);
    f << "t";
    const int N = run.family.size();
    for (int j = 1; j <= N; ++j) f << ",omega" << j;
    for (int j = 1; j <= N; ++j) f << ",x" << j;
    f << ",eps_h,max_ortho";
    const bool has_gamma = !run.modulation_series[i].empty() &&
                           !run.modulation_series[i].front().gamma_plus.empty();
    if (has_gamma)
      for (int j = 1; j <= N; ++j) f << ",gamma_plus" << j << ",gamma_minus" << j;
    f << "\n";
    for (const auto& row : run.modulation_series[i]) {
      f << row.time;
      for (double v : row.tilde_omegas) f << ',' << v;
      for (double v : row.tilde_positions) f << ',' << v;
      f << ',' << row.eps_norm << ',' << row.max_ortho;
      if (has_gamma)
        for (int j = 0; j < N; ++j)
          f << ',' << row.gamma_plus[j] << ',' << row.gamma_minus[j];
      f << "\n";
    }
  }
  std::ofstream f(dir + "/summary.csv");
  f.precision(15);
  f << "n,final_time,cauchy_to_previous,shoot_objective\n";
  for (size_t i = 0; i < run.final_times.size(); ++i) {
    f << i << ',' << run.final_times[i] << ',';
    if (i > 0 && i - 1 < run.cauchy_series.size())
      f << run.cauchy_series[i - 1];
    f << ',';
    if (i < run.shoot_objectives.size()) f << run.shoot_objectives[i];
    f << "\n";
  }
}

}  // namespace bqlab
