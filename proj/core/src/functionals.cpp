#include "bqlab/functionals.hpp"

#include <array>
#include <cmath>

#include "bqlab/errors.hpp"

namespace bqlab {

double energy(const FieldState& state, double p) {
  if (!(p > 0)) throw ContractError("energy: p must be > 0");
  const Grid& g = *state.grid;
  Eigen::ArrayXd du1 = spectral_derivative(g, state.u1, 1);
  Eigen::ArrayXd dens = state.u1.square() + state.u2.square() + du1.square() -
                        state.u1.abs().pow(2.0 * p + 2.0) / (p + 1.0);
  return 0.5 * quadrature(g, dens);
}

double momentum(const FieldState& state) {
  return 0.5 * quadrature(*state.grid, state.u1 * state.u2);
}

namespace {

// Cumulative integral table of the bump exp(-1/(1-s^2)) on [-1, 1].
// The bump vanishes to all orders at the endpoints, so a fine Simpson table
// is far more accurate than needed here.
constexpr int kStepTableSize = 1 << 15;

struct StepTable {
  std::array<double, kStepTableSize + 1> cum{};
  StepTable() {
    const double h = 2.0 / kStepTableSize;
    auto bump = [](double s) {
      const double d = 1.0 - s * s;
      return d > 0 ? std::exp(-1.0 / d) : 0.0;
    };
    cum[0] = 0.0;
    for (int i = 0; i < kStepTableSize; ++i) {
      const double a = -1.0 + i * h;
      cum[i + 1] = cum[i] + h / 6.0 *
                                (bump(a) + 4.0 * bump(a + 0.5 * h) +
                                 bump(a + h));
    }
    const double total = cum[kStepTableSize];
    for (auto& v : cum) v /= total;
  }
};

const StepTable& step_table() {
  static const StepTable table;
  return table;
}

}  // namespace

double smooth_step(double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const auto& cum = step_table().cum;
  const double pos = (s + 1.0) / 2.0 * kStepTableSize;
  const int i = std::min(static_cast<int>(pos), kStepTableSize - 1);
  const double frac = pos - i;
  return cum[i] + frac * (cum[i + 1] - cum[i]);
}

CutoffSystem CutoffSystem::make(const SolitonFamily& family) {
  CutoffSystem c;
  c.n_ = family.size();
  for (int j = 1; j < c.n_; ++j)
    c.midspeeds_.push_back(
        0.5 * (family.solitons[j - 1].omega + family.solitons[j].omega));
  return c;
}

Eigen::ArrayXd CutoffSystem::psi(int j, const Grid& grid, double t) const {
  if (j < 1 || j > n_ + 1) throw ContractError("cutoff: psi index out of range");
  if (!(t > 0)) throw DomainError("cutoff: requires t > 0");
  if (j == 1) return Eigen::ArrayXd::Ones(grid.n_points());
  if (j == n_ + 1) return Eigen::ArrayXd::Zero(grid.n_points());
  const double m = midspeeds_[j - 2];
  const double rt = std::sqrt(t);
  Eigen::ArrayXd out(grid.n_points());
  for (int i = 0; i < grid.n_points(); ++i)
    out[i] = smooth_step((grid.x()[i] - m * t) / rt);
  return out;
}

Eigen::ArrayXd CutoffSystem::phi(int j, const Grid& grid, double t) const {
  if (j < 1 || j > n_) throw ContractError("cutoff: phi index out of range");
  return psi(j, grid, t) - psi(j + 1, grid, t);
}

FunctionalReport localized_functionals(const FieldState& state,
                                       const SolitonFamily& family,
                                       const CutoffSystem& cutoffs, double p) {
  if (!(state.time > 0))
    throw DomainError("localized_functionals: cutoffs undefined for t <= 0");
  if (cutoffs.count() != family.size())
    throw ContractError("localized_functionals: cutoff/family size mismatch");
  const Grid& g = *state.grid;
  const double t = state.time;

  FunctionalReport rep;
  rep.time = t;
  rep.energy = energy(state, p);
  rep.momentum = momentum(state);

  Eigen::ArrayXd du1 = spectral_derivative(g, state.u1, 1);
  Eigen::ArrayXd mom_dens = 0.5 * state.u1 * state.u2;
  Eigen::ArrayXd ene_dens =
      0.5 * (state.u1.square() + state.u2.square() + du1.square() -
             state.u1.abs().pow(2.0 * p + 2.0) / (p + 1.0));

  for (int j = 1; j <= family.size(); ++j) {
    Eigen::ArrayXd w = cutoffs.phi(j, g, t);
    const double mj = quadrature(g, mom_dens * w);
    const double ej = quadrature(g, ene_dens * w);
    rep.localized_momenta.push_back(mj);
    rep.localized_energies.push_back(ej);
    rep.actions.push_back(ej + family.solitons[j - 1].omega * mj);
    rep.total_action += rep.actions.back();
  }
  return rep;
}

double h_distance_to_sum(const FieldState& state, const SolitonFamily& family) {
  FieldState sum = soliton_sum(family, state.grid, state.time);
  return h_norm_pair(*state.grid, state.u1 - sum.u1, state.u2 - sum.u2);
}

}  // namespace bqlab
