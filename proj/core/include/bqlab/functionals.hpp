#pragma once

#include <vector>

#include "bqlab/grid.hpp"
#include "bqlab/soliton.hpp"

namespace bqlab {

/// E(u) = 1/2 int(|u1|^2 + |u2|^2 + |dx u1|^2 - |u1|^(2p+2)/(p+1)) dx.
double energy(const FieldState& state, double p);

/// M(u) = 1/2 int u1 u2 dx.
double momentum(const FieldState& state);

/// C-infinity step: 0 for s <= -1, 1 for s >= 1, the normalized integral of
/// exp(-1/(1-s^2)) in between. Monotone, values in [0,1].
double smooth_step(double s);

/// Moving partition of unity separating the family's solitons.
/// psi_1 == 1, psi_j(x,t) = step((x - m_j t)/sqrt(t)) with midspeeds
/// m_j = (omega_{j-1} + omega_j)/2; members phi_j = psi_j - psi_{j+1},
/// phi_N = psi_N. Sum_j phi_j == 1 exactly by telescoping.
class CutoffSystem {
 public:
  static CutoffSystem make(const SolitonFamily& family);

  int count() const { return n_; }
  const std::vector<double>& midspeeds() const { return midspeeds_; }

  /// psi_j on a grid at time t > 0 (1-based j, j in [1, N]; psi_{N+1} == 0).
  Eigen::ArrayXd psi(int j, const Grid& grid, double t) const;

  /// Partition member phi_j (1-based).
  Eigen::ArrayXd phi(int j, const Grid& grid, double t) const;

 private:
  int n_ = 1;
  std::vector<double> midspeeds_;  // m_2 .. m_N
};

struct FunctionalReport {
  double energy = 0;
  double momentum = 0;
  std::vector<double> localized_momenta;
  std::vector<double> localized_energies;
  std::vector<double> actions;  // S_loc^j = E_j + omega_j M_j
  double total_action = 0;
  double time = 0;
};

/// All localized quantities at state.time; requires state.time > 0.
FunctionalReport localized_functionals(const FieldState& state,
                                       const SolitonFamily& family,
                                       const CutoffSystem& cutoffs, double p);

/// H-distance from the state to the family's soliton sum at state.time.
double h_distance_to_sum(const FieldState& state, const SolitonFamily& family);

}  // namespace bqlab
