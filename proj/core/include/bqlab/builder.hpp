#pragma once

#include <string>
#include <vector>

#include "bqlab/evolution.hpp"
#include "bqlab/modulation.hpp"
#include "bqlab/soliton.hpp"
#include "bqlab/spectrum.hpp"

namespace bqlab {

struct BuildConfig {
  double dt = 0.0;            // 0 = derived from the grid, snapped to divide 0.5
  double checkpoint_dt = 0.5; // spacing of stored states
  bool dealias = true;
  bool keep_trajectories = true;
  int grid_n_override = 0;    // 0 = resolution rule
  double grid_half_length_override = 0.0;
};

struct ModulationRow {
  double time = 0;
  double eps_norm = 0;
  double max_ortho = 0;
  std::vector<double> tilde_omegas, tilde_positions;
  std::vector<double> gamma_plus, gamma_minus;  // supercritical only
};

/// One backward-construction experiment: for each final time T^n, the
/// approximate solution evolved from its final data down to t0, with the
/// distance-to-sum series and the Cauchy differences at t0.
struct ConstructionRun {
  SolitonFamily family;
  double t0 = 0;
  std::vector<double> final_times;
  GridPtr grid;
  double dt = 0;

  std::vector<std::vector<FieldState>> trajectories;  // empty if not kept
  std::vector<FieldState> states_at_t0;
  std::vector<std::vector<std::pair<double, double>>> error_series;
  std::vector<std::vector<ModulationRow>> modulation_series;
  std::vector<double> cauchy_series;

  // Supercritical bookkeeping.
  std::vector<std::vector<double>> alphas;       // correction coefficients
  std::vector<std::vector<double>> a_minus;      // measured controlled
                                                 // projections at T^n
  std::vector<double> shoot_objectives;          // max_t |gamma| e^{2 w*^3/2 t}
  std::vector<double> literal_gamma_minus_max;   // same weight, minus pairing

  bool failed = false;
  int failed_at = -1;
  double failure_time = 0;
  std::string failure_reason;
};

ConstructionRun build_subcritical(const SolitonFamily& family, double t0,
                                  const std::vector<double>& final_times,
                                  const BuildConfig& cfg);

struct ShootConfig {
  int max_outer = 4;          // model-rebuild iterations
  double probe = 0.0;         // response-probe coefficient; 0 = scaled from the
                              // growth rate and span
  double contamination = 0.0; // fixed seed along the backward-unstable modes
  bool shoot = true;          // false = zero-correction run
};

/// Backward construction with final-data corrections along the modes that
/// grow under backward evolution; the shooting minimizes the weighted sup of
/// their measured projections over the trajectory.
ConstructionRun build_supercritical(const SolitonFamily& family, double t0,
                                    const std::vector<double>& final_times,
                                    const BuildConfig& cfg,
                                    const ShootConfig& shoot,
                                    const std::vector<PegoWeinsteinModes>& modes);

struct DecayFit {
  double rate = 0;
  double constant = 0;
  double r2 = 0;
};

/// Log-linear least squares of an error series against time.
DecayFit decay_fit(const std::vector<std::pair<double, double>>& series);

/// Seed the backward-growing mode on top of a single soliton, evolve the full
/// system backward, and fit the growth rate of its projection. The result
/// should match the eigensolve rate.
double measure_backward_growth_rate(const SolitonFamily& family,
                                    const PegoWeinsteinModes& modes,
                                    const BuildConfig& cfg);

/// Gram matrix of correction modes against their extractors at time T
/// (identity up to exponentially small cross terms).
Eigen::MatrixXd finaldata_gram(const SolitonFamily& family,
                               const std::vector<PegoWeinsteinModes>& modes,
                               GridPtr grid, double T);

void write_construction_csv(const ConstructionRun& run, const std::string& dir);

}  // namespace bqlab
