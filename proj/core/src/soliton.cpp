#include "bqlab/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bqlab/errors.hpp"

namespace bqlab {

namespace {

// sech(z) without overflow for large |z|.
double sech(double z) {
  const double a = std::abs(z);
  const double e = std::exp(-a);
  return 2.0 * e / (1.0 + e * e);
}

int next_pow2(int n) {
  int v = 16;
  while (v < n) v *= 2;
  return v;
}

}  // namespace

void SolitonParams::validate() const {
  if (!(p > 0)) throw ContractError("soliton: p must be > 0");
  if (!(std::abs(omega) < 1.0))
    throw ContractError("soliton: |omega| must be < 1, got omega=" +
                        std::to_string(omega));
  if (!std::isfinite(x0)) throw ContractError("soliton: x0 must be finite");
}

double SolitonParams::decay_rate() const { return std::sqrt(1.0 - omega * omega); }
double SolitonParams::width() const { return 1.0 / decay_rate(); }

SolitonFamily SolitonFamily::make(double p, std::vector<SolitonParams> solitons) {
  if (solitons.empty()) throw ContractError("family: needs at least one soliton");
  if (!(p > 0)) throw ContractError("family: p must be > 0");
  if (std::abs(p - 2.0) < 1e-12)
    throw ContractError("family: the critical exponent p=2 has no regime");
  SolitonFamily f;
  f.p = p;
  f.regime = p < 2.0 ? Regime::subcritical : Regime::supercritical;
  for (auto& s : solitons) {
    s.p = p;
    s.validate();
  }
  std::sort(solitons.begin(), solitons.end(),
            [](const SolitonParams& a, const SolitonParams& b) {
              return a.omega < b.omega;
            });
  double sep = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j + 1 < solitons.size(); ++j) {
    const double gap = solitons[j + 1].omega - solitons[j].omega;
    if (gap < 1e-12)
      throw ContractError("family: speeds must be pairwise distinct");
    sep = std::min(sep, gap);
  }
  double m = sep;
  for (const auto& s : solitons) m = std::min(m, 1.0 - s.omega * s.omega);
  f.omega_star = m / 256.0;
  f.solitons = std::move(solitons);
  return f;
}

void SolitonFamily::tighten_omega_star(const std::vector<double>& growth_rates) {
  if (regime != Regime::supercritical)
    throw ContractError("tighten_omega_star: only meaningful for p > 2");
  if (growth_rates.size() != solitons.size())
    throw ContractError("tighten_omega_star: one growth rate per soliton");
  for (size_t j = 0; j < solitons.size(); ++j) {
    const double rate = growth_rates[j];
    const double w = solitons[j].omega;
    if (!(rate > 0) || !(w > 0))
      throw DomainError(
          "tighten_omega_star: needs a positive growth rate and speed "
          "(rate=" + std::to_string(rate) + ", omega=" + std::to_string(w) + ")");
    omega_star = std::min(omega_star, std::pow(rate, 1.5) * w / 256.0);
  }
}

double ground_state_at(double p, double x) {
  const double s = sech(p * x);
  return std::pow((p + 1.0) * s * s, 1.0 / (2.0 * p));
}

Eigen::ArrayXd ground_state(double p, const Eigen::ArrayXd& x) {
  if (!(p > 0)) throw ContractError("ground_state: p must be > 0");
  Eigen::ArrayXd out(x.size());
  for (int i = 0; i < x.size(); ++i) out[i] = ground_state_at(p, x[i]);
  return out;
}

double profile_at(const SolitonParams& s, double y) {
  const double a = 1.0 - s.omega * s.omega;
  return std::pow(a, 1.0 / (2.0 * s.p)) *
         ground_state_at(s.p, std::sqrt(a) * y);
}

// Phi'(z) = -tanh(p z) Phi(z), so the chain rule gives the scaled forms below.
double profile_dy_at(const SolitonParams& s, double y) {
  const double root = s.decay_rate();
  return -root * std::tanh(s.p * root * y) * profile_at(s, y);
}

double profile_domega_at(const SolitonParams& s, double y) {
  const double a = 1.0 - s.omega * s.omega;
  const double z = std::sqrt(a) * y;
  const double phi = ground_state_at(s.p, z);
  const double dphi = -std::tanh(s.p * z) * phi;
  const double pref = std::pow(a, 1.0 / (2.0 * s.p) - 1.0);
  return -s.omega * (pref * phi / s.p +
                     std::pow(a, 1.0 / (2.0 * s.p) - 0.5) * y * dphi);
}

Eigen::ArrayXd profile(const SolitonParams& s, const Eigen::ArrayXd& y) {
  Eigen::ArrayXd out(y.size());
  for (int i = 0; i < y.size(); ++i) out[i] = profile_at(s, y[i]);
  return out;
}

Eigen::ArrayXd profile_dy(const SolitonParams& s, const Eigen::ArrayXd& y) {
  Eigen::ArrayXd out(y.size());
  for (int i = 0; i < y.size(); ++i) out[i] = profile_dy_at(s, y[i]);
  return out;
}

Eigen::ArrayXd profile_domega(const SolitonParams& s, const Eigen::ArrayXd& y) {
  Eigen::ArrayXd out(y.size());
  for (int i = 0; i < y.size(); ++i) out[i] = profile_domega_at(s, y[i]);
  return out;
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> scaled_soliton(
    const SolitonParams& s, const Eigen::ArrayXd& x) {
  s.validate();
  Eigen::ArrayXd phi = profile(s, x - s.x0);
  Eigen::ArrayXd psi = -s.omega * phi;
  return {std::move(phi), std::move(psi)};
}

bool grid_resolves(const Grid& grid, const SolitonParams& s) {
  return s.width() / grid.spacing() >= 8.0 - 1e-9;
}

FieldState soliton_sum(const SolitonFamily& family, GridPtr grid, double t) {
  for (const auto& s : family.solitons)
    if (!grid_resolves(*grid, s))
      throw ResolutionError(
          "soliton_sum: grid spacing " + std::to_string(grid->spacing()) +
          " gives fewer than 8 points per width " + std::to_string(s.width()));
  FieldState out = FieldState::zero(grid, t);
  for (const auto& s : family.solitons) {
    Eigen::ArrayXd y = grid->x() - (s.omega * t + s.x0);
    Eigen::ArrayXd phi = profile(s, y);
    out.u1 += phi;
    out.u2 += -s.omega * phi;
  }
  return out;
}

double power_nonlinearity(double s, double p) {
  if (s == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(s), 2.0 * p + 1.0), s);
}

Eigen::ArrayXd power_nonlinearity(const Eigen::ArrayXd& s, double p) {
  Eigen::ArrayXd out(s.size());
  for (int i = 0; i < s.size(); ++i) out[i] = power_nonlinearity(s[i], p);
  return out;
}

double elliptic_residual_of(const Grid& grid, const Eigen::ArrayXd& phi,
                            double omega, double p) {
  Eigen::ArrayXd res = -spectral_derivative(grid, phi, 2) +
                       (1.0 - omega * omega) * phi - power_nonlinearity(phi, p);
  return res.abs().maxCoeff();
}

double elliptic_residual(const SolitonParams& s, const Grid& grid) {
  s.validate();
  if (!grid_resolves(grid, s))
    throw ResolutionError("elliptic_residual: under-resolved profile");
  SolitonParams centered = s;
  centered.x0 = 0.0;
  Eigen::ArrayXd phi = profile(centered, grid.x());
  return elliptic_residual_of(grid, phi, s.omega, s.p);
}

double profile_l2_squared(double p, double omega) {
  // |Phi|^2 = (p+1)^(1/p) (1/p) * sqrt(pi) Gamma(1/p) / Gamma(1/p + 1/2),
  // then the scaling law (1-w^2)^(1/p - 1/2).
  const double base = std::pow(p + 1.0, 1.0 / p) / p * std::sqrt(M_PI) *
                      std::tgamma(1.0 / p) / std::tgamma(1.0 / p + 0.5);
  return std::pow(1.0 - omega * omega, 1.0 / p - 0.5) * base;
}

GridSpec suggested_grid(double p, const std::vector<SolitonParams>& solitons,
                        double horizon) {
  if (solitons.empty()) throw ContractError("suggested_grid: no solitons");
  double maxx = 0, maxw = 0, kmin = 1.0;
  for (const auto& s : solitons) {
    maxx = std::max(maxx, std::abs(s.x0));
    maxw = std::max(maxw, std::abs(s.omega));
    kmin = std::min(kmin, s.decay_rate());
  }
  // Tail margin: e^{-k*margin} <= 1e-12 over the whole horizon; the 40-unit
  // base suffices for decay rates >= 0.7.
  const double margin = std::max(40.0, 28.0 / kmin);
  const double L = margin + maxx + horizon * maxw;
  double n_req = 16;
  for (const auto& s : solitons) {
    const double k = s.decay_rate();
    n_req = std::max(n_req, 2.0 * L * 8.0 * k);             // 8 points per width
    n_req = std::max(n_req, (92.0 / (M_PI * M_PI)) * L * p * k);  // spectral tail
  }
  return {L, next_pow2(static_cast<int>(std::ceil(n_req)))};
}

GridPtr suggested_grid_ptr(const SolitonFamily& family, double horizon) {
  GridSpec spec = suggested_grid(family.p, family.solitons, horizon);
  return make_grid(spec.half_length, spec.n_points);
}

}  // namespace bqlab
