#pragma once

#include <utility>
#include <vector>

#include "bqlab/grid.hpp"

namespace bqlab {

/// One solitary wave: nonlinearity exponent p, speed |omega| < 1, and the
/// initial center x0 (the wave travels along x = omega*t + x0).
struct SolitonParams {
  double p = 1.0;
  double omega = 0.0;
  double x0 = 0.0;

  void validate() const;
  /// Tail decay rate sqrt(1 - omega^2) of the profile.
  double decay_rate() const;
  /// Profile width 1/sqrt(1 - omega^2).
  double width() const;
};

enum class Regime { subcritical, supercritical };

/// An ordered family of N solitons sharing one p, sorted by increasing speed,
/// together with the separation scale omega_star.
struct SolitonFamily {
  double p = 1.0;
  std::vector<SolitonParams> solitons;
  double omega_star = 0.0;
  Regime regime = Regime::subcritical;

  static SolitonFamily make(double p, std::vector<SolitonParams> solitons);

  int size() const { return static_cast<int>(solitons.size()); }

  /// Supercritical runs additionally bound omega_star by
  /// min_j growth_rate_j^{3/2} * omega_j; the rates come from the symplectic
  /// eigensolve and are supplied once available.
  void tighten_omega_star(const std::vector<double>& growth_rates);
};

/// Ground state profile ((p+1) sech^2(p x))^(1/2p), evaluated pointwise.
Eigen::ArrayXd ground_state(double p, const Eigen::ArrayXd& x);
double ground_state_at(double p, double x);

/// Speed-omega profile Phi_w(y) = (1-w^2)^(1/2p) Phi(sqrt(1-w^2) y) and its
/// closed-form derivatives; `y` is distance from the wave center.
double profile_at(const SolitonParams& s, double y);
double profile_dy_at(const SolitonParams& s, double y);
double profile_domega_at(const SolitonParams& s, double y);

Eigen::ArrayXd profile(const SolitonParams& s, const Eigen::ArrayXd& y);
Eigen::ArrayXd profile_dy(const SolitonParams& s, const Eigen::ArrayXd& y);
Eigen::ArrayXd profile_domega(const SolitonParams& s, const Eigen::ArrayXd& y);

/// (phi, psi) with phi = Phi_w(x - x0), psi = -w*phi.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> scaled_soliton(
    const SolitonParams& s, const Eigen::ArrayXd& x);

/// Sum of traveling solitons at time t as a FieldState.
FieldState soliton_sum(const SolitonFamily& family, GridPtr grid, double t);

/// Sup-norm of -phi'' + (1-w^2) phi - |phi|^2p phi on the grid (phi centered
/// at x0 = 0 so the profile is fully supported).
double elliptic_residual(const SolitonParams& s, const Grid& grid);

/// Same residual for an arbitrary candidate profile.
double elliptic_residual_of(const Grid& grid, const Eigen::ArrayXd& phi,
                            double omega, double p);

/// L^2 norm of Phi_w from the scaling law, |Phi_w|^2 = (1-w^2)^(1/p-1/2)|Phi|^2.
double profile_l2_squared(double p, double omega);

/// sign(s)|s|^(2p) s: the real odd extension of the nonlinearity, well defined
/// for fractional p and negative field values.
double power_nonlinearity(double s, double p);
Eigen::ArrayXd power_nonlinearity(const Eigen::ArrayXd& s, double p);

struct GridSpec {
  double half_length;
  int n_points;
};

/// Domain size and resolution rule: half_length covers initial positions plus
/// horizon * max speed plus enough room that profile tails fall below 1e-12;
/// n_points gives >= 8 points per unit width and resolves the spectral tail of
/// the narrowest profile. Result n is a power of two.
GridSpec suggested_grid(double p, const std::vector<SolitonParams>& solitons,
                        double horizon);
GridPtr suggested_grid_ptr(const SolitonFamily& family, double horizon);

/// True if `grid` meets the 8-points-per-width rule for s.
bool grid_resolves(const Grid& grid, const SolitonParams& s);

}  // namespace bqlab
