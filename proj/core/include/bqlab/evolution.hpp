#pragma once

#include <utility>
#include <vector>

#include "bqlab/grid.hpp"

namespace bqlab {

enum class Direction { forward, backward };

struct EvolveConfig {
  double dt = 0.0;  // 0 = default_dt(grid)
  double t_end = 0.0;
  double nonlinearity_p = 1.0;
  bool dealias = true;
  int checkpoint_stride = 0;  // steps between checkpoints; 0 = ~100 per run
  Direction direction = Direction::forward;
};

/// Conservative default step: 10 / (1 + k_max sqrt(1 + k_max^2)). The linear
/// part is integrated exactly, so this bounds only the nonlinear-term error.
double default_dt(const Grid& grid);

/// Right-hand side of the first-order system:
///   du1 = dx u2,  du2 = dx(u1 - dxx u1 - |u1|^2p u1).
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> rhs(const FieldState& state, double p);

/// One time step of size cfg.dt (direction per cfg). The linear part is
/// advanced by the exact per-mode matrix exponential; the nonlinear part by a
/// fourth-order exponential integrator.
FieldState step(const FieldState& state, const EvolveConfig& cfg);

struct Trajectory {
  std::vector<FieldState> states;  // checkpoints in increasing time order
  double dt_used = 0;
  long steps = 0;

  const FieldState& front() const { return states.front(); }
  const FieldState& back() const { return states.back(); }
};

/// Integrate from state.time to cfg.t_end (forward), checkpointing every
/// cfg.checkpoint_stride steps. Throws BlowupError if the H-norm grows more
/// than tenfold within one step or turns non-finite.
Trajectory evolve(const FieldState& initial, const EvolveConfig& cfg);

/// Solve the final-value problem: states at checkpoint times from t_start up
/// to final.time. Uses the time-reversal symmetry (u1,u2,t) -> (u1,-u2,-t),
/// which maps solutions to solutions, then forward integration.
Trajectory evolve_backward_from_final(const FieldState& final_state,
                                      double t_start, const EvolveConfig& cfg);

}  // namespace bqlab
