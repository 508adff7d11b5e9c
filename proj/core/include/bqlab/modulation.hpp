#pragma once

#include <vector>

#include "bqlab/grid.hpp"
#include "bqlab/soliton.hpp"
#include "bqlab/spectrum.hpp"

namespace bqlab {

enum class ModulationMode { subcritical, supercritical };

/// Decomposition of a state near a soliton sum into modulated waves plus a
/// residual. The modulated wave j is Phi_{tw_j}(x - omega_j t - tx_j) paired
/// with -tw_j times itself; in supercritical mode the speeds stay nominal and
/// only the positions move.
struct ModulationDecomposition {
  ModulationMode mode = ModulationMode::subcritical;
  std::vector<double> tilde_omegas;
  std::vector<double> tilde_positions;
  FieldState epsilon;
  /// Imposed conditions at the solution: per soliton, the pair projections
  /// (eps, R_j)_{L2xL2} (subcritical only) and (eps, dx R_j)_{L2xL2}.
  std::vector<double> ortho_residuals;
  /// All per-component products (eps_m, R_j^m), (eps_m, dx R_j^m), m = 1,2.
  std::vector<double> diagnostics;
  int newton_iterations = 0;
};

struct ModulateOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;  // on the residual, relative to the state scale
  double damping = 0.5;
};

/// Modulation radius: states farther than this from the nominal sum are
/// rejected as out of basin.
double modulation_radius(const SolitonFamily& family, const Grid& grid);

ModulationDecomposition modulate(const FieldState& state,
                                 const SolitonFamily& family,
                                 ModulationMode mode,
                                 const ModulateOptions& opts = {});

struct DriftReport {
  std::vector<double> times;        // left endpoint of each interval
  std::vector<double> ratios;       // drift / (|eps|_H + e^{-3 w*^{3/2} t})
  std::vector<bool> in_basin;       // per checkpoint
  double max_ratio = 0;
  bool complete = true;             // false when some checkpoint was skipped
};

/// Finite-difference the modulated parameters across trajectory checkpoints
/// and compare against the drift bound scale.
DriftReport parameter_drift_bound_check(const std::vector<FieldState>& trajectory,
                                        const SolitonFamily& family,
                                        ModulationMode mode);

struct UnstableProjections {
  std::vector<double> plus;   // (eps, Z+_j translate) per soliton
  std::vector<double> minus;  // (eps, Z-_j translate) per soliton
};

/// Project the residual onto the translated biorthogonal mode pairs. The
/// translate of Z_j's center is omega_j t + tx_j.
UnstableProjections unstable_projections(
    const ModulationDecomposition& decomp, const SolitonFamily& family,
    const std::vector<PegoWeinsteinModes>& modes);

}  // namespace bqlab
