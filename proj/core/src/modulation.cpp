#include "bqlab/modulation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "bqlab/errors.hpp"
#include "bqlab/functionals.hpp"

namespace bqlab {

namespace {

struct Problem {
  const FieldState& state;
  const SolitonFamily& family;
  ModulationMode mode;
  int params_per_soliton() const {
    return mode == ModulationMode::subcritical ? 2 : 1;
  }
  int unknowns() const { return family.size() * params_per_soliton(); }

  // theta layout: subcritical (w_1, x_1, ..., w_N, x_N), supercritical (x_j).
  SolitonParams wave(const Eigen::VectorXd& theta, int j) const {
    SolitonParams s = family.solitons[j];
    if (mode == ModulationMode::subcritical) {
      s.omega = theta[2 * j];
      s.x0 = theta[2 * j + 1];
    } else {
      s.x0 = theta[j];
    }
    return s;
  }

  Eigen::VectorXd nominal() const {
    Eigen::VectorXd theta(unknowns());
    for (int j = 0; j < family.size(); ++j) {
      if (mode == ModulationMode::subcritical) {
        theta[2 * j] = family.solitons[j].omega;
        theta[2 * j + 1] = family.solitons[j].x0;
      } else {
        theta[j] = family.solitons[j].x0;
      }
    }
    return theta;
  }

  // Residual: per soliton, the pair projections of eps onto the modulated
  // wave (subcritical) and onto its x-derivative (both modes).
  Eigen::VectorXd residual(const Eigen::VectorXd& theta) const {
    const Grid& g = *state.grid;
    const double t = state.time;
    Eigen::ArrayXd e1 = state.u1, e2 = state.u2;
    std::vector<Eigen::ArrayXd> r1(family.size()), d1(family.size());
    std::vector<double> speeds(family.size());
    for (int j = 0; j < family.size(); ++j) {
      SolitonParams s = wave(theta, j);
      if (!(std::abs(s.omega) < 1.0))
        throw ConvergenceError("modulate: iterate left |omega| < 1");
      Eigen::ArrayXd y = g.x() - (family.solitons[j].omega * t + s.x0);
      r1[j] = profile(s, y);
      d1[j] = profile_dy(s, y);
      speeds[j] = s.omega;
      e1 -= r1[j];
      e2 -= -s.omega * r1[j];
    }
    Eigen::VectorXd F(unknowns());
    for (int j = 0; j < family.size(); ++j) {
      const double w = speeds[j];
      const double gd =
          inner_l2(g, e1, d1[j]) + inner_l2(g, e2, -w * d1[j]);
      if (mode == ModulationMode::subcritical) {
        F[2 * j] = inner_l2(g, e1, r1[j]) + inner_l2(g, e2, -w * r1[j]);
        F[2 * j + 1] = gd;
      } else {
        F[j] = gd;
      }
    }
    return F;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const {
    const int m = unknowns();
    Eigen::MatrixXd J(m, m);
    for (int c = 0; c < m; ++c) {
      const double h = 1e-6;
      Eigen::VectorXd tp = theta, tm = theta;
      tp[c] += h;
      tm[c] -= h;
      J.col(c) = (residual(tp) - residual(tm)) / (2.0 * h);
    }
    return J;
  }
};

}  // namespace

double modulation_radius(const SolitonFamily& family, const Grid& grid) {
  double min_norm = std::numeric_limits<double>::infinity();
  for (const auto& s : family.solitons) {
    SolitonParams centered = s;
    centered.x0 = 0.0;
    Eigen::ArrayXd phi = profile(centered, grid.x());
    min_norm = std::min(min_norm, h_norm_pair(grid, phi, -s.omega * phi));
  }
  return 0.1 * min_norm;
}

ModulationDecomposition modulate(const FieldState& state,
                                 const SolitonFamily& family,
                                 ModulationMode mode,
                                 const ModulateOptions& opts) {
  if (mode == ModulationMode::supercritical &&
      family.regime != Regime::supercritical)
    throw ContractError("modulate: supercritical mode needs p > 2");

  const double dist = h_distance_to_sum(state, family);
  const double radius = modulation_radius(family, *state.grid);
  if (dist > radius)
    throw OutOfBasinError("modulate: distance " + std::to_string(dist) +
                          " exceeds the modulation radius " +
                          std::to_string(radius));

  Problem prob{state, family, mode};
  Eigen::VectorXd theta = prob.nominal();
  Eigen::VectorXd F = prob.residual(theta);
  const double scale =
      opts.tolerance * std::max(1.0, h_norm(state));

  int iters = 0;
  while (F.cwiseAbs().maxCoeff() > scale && iters < opts.max_iterations) {
    Eigen::MatrixXd J = prob.jacobian(theta);
    Eigen::VectorXd delta = J.fullPivLu().solve(-F);
    double lambda = 1.0;
    bool stepped = false;
    for (int k = 0; k < 14; ++k) {
      Eigen::VectorXd trial = theta + lambda * delta;
      bool admissible = true;
      if (mode == ModulationMode::subcritical)
        for (int j = 0; j < family.size(); ++j)
          if (!(std::abs(trial[2 * j]) < 1.0)) admissible = false;
      if (admissible) {
        Eigen::VectorXd Ftrial = prob.residual(trial);
        if (Ftrial.norm() <= F.norm() || lambda < 1e-3) {
          theta = trial;
          F = Ftrial;
          stepped = true;
          break;
        }
      }
      lambda *= opts.damping;
    }
    if (!stepped)
      throw ConvergenceError("modulate: line search found no admissible step");
    ++iters;
  }
  if (F.cwiseAbs().maxCoeff() > 100 * scale)
    throw ConvergenceError("modulate: Newton stagnated after " +
                           std::to_string(iters) + " iterations, residual " +
                           std::to_string(F.cwiseAbs().maxCoeff()));

  ModulationDecomposition out;
  out.mode = mode;
  out.newton_iterations = iters;
  const Grid& g = *state.grid;
  const double t = state.time;

  out.epsilon = FieldState::zero(state.grid, t);
  out.epsilon.u1 = state.u1;
  out.epsilon.u2 = state.u2;
  std::vector<Eigen::ArrayXd> r1(family.size()), d1(family.size());
  for (int j = 0; j < family.size(); ++j) {
    SolitonParams s = prob.wave(theta, j);
    out.tilde_omegas.push_back(s.omega);
    out.tilde_positions.push_back(s.x0);
    Eigen::ArrayXd y = g.x() - (family.solitons[j].omega * t + s.x0);
    r1[j] = profile(s, y);
    d1[j] = profile_dy(s, y);
    out.epsilon.u1 -= r1[j];
    out.epsilon.u2 -= -s.omega * r1[j];
  }
  for (int i = 0; i < F.size(); ++i) out.ortho_residuals.push_back(F[i]);
  for (int j = 0; j < family.size(); ++j) {
    const double w = out.tilde_omegas[j];
    out.diagnostics.push_back(inner_l2(g, out.epsilon.u1, r1[j]));
    out.diagnostics.push_back(inner_l2(g, out.epsilon.u2, -w * r1[j]));
    out.diagnostics.push_back(inner_l2(g, out.epsilon.u1, d1[j]));
    out.diagnostics.push_back(inner_l2(g, out.epsilon.u2, -w * d1[j]));
  }
  return out;
}

DriftReport parameter_drift_bound_check(const std::vector<FieldState>& trajectory,
                                        const SolitonFamily& family,
                                        ModulationMode mode) {
  DriftReport rep;
  std::vector<double> times;
  std::vector<std::vector<double>> omegas, positions;
  std::vector<double> eps_norms;
  for (const auto& s : trajectory) {
    try {
      ModulationDecomposition d = modulate(s, family, mode);
      rep.in_basin.push_back(true);
      times.push_back(s.time);
      omegas.push_back(d.tilde_omegas);
      positions.push_back(d.tilde_positions);
      eps_norms.push_back(h_norm(d.epsilon));
    } catch (const OutOfBasinError&) {
      rep.in_basin.push_back(false);
      rep.complete = false;
    }
  }
  const double ws32 = std::pow(family.omega_star, 1.5);
  for (size_t i = 0; i + 1 < times.size(); ++i) {
    const double dt = times[i + 1] - times[i];
    if (!(dt > 0)) continue;
    double drift = 0;
    for (int j = 0; j < family.size(); ++j)
      drift += std::abs(omegas[i + 1][j] - omegas[i][j]) +
               std::abs(positions[i + 1][j] - positions[i][j]);
    drift /= dt;
    const double bound = eps_norms[i] + std::exp(-3.0 * ws32 * times[i]);
    rep.times.push_back(times[i]);
    rep.ratios.push_back(drift / bound);
    rep.max_ratio = std::max(rep.max_ratio, drift / bound);
  }
  return rep;
}

UnstableProjections unstable_projections(
    const ModulationDecomposition& decomp, const SolitonFamily& family,
    const std::vector<PegoWeinsteinModes>& modes) {
  if (static_cast<int>(modes.size()) != family.size())
    throw ContractError("unstable_projections: one mode pair per soliton");
  const Grid& g = *decomp.epsilon.grid;
  const double t = decomp.epsilon.time;
  UnstableProjections out;
  for (int j = 0; j < family.size(); ++j) {
    const auto& m = modes[j];
    if (std::abs(m.omega - family.solitons[j].omega) > 1e-12 ||
        std::abs(m.p - family.p) > 1e-12)
      throw ContractError("unstable_projections: modes do not match soliton " +
                          std::to_string(j));
    const double center = family.solitons[j].omega * t + decomp.tilde_positions[j];
    auto project = [&](const Eigen::ArrayXd& z1, const Eigen::ArrayXd& z2) {
      Eigen::ArrayXd a = z1, b = z2;
      if (!(*m.grid == g)) {
        a = resample(*m.grid, z1, g);
        b = resample(*m.grid, z2, g);
      }
      a = translate(g, a, center);
      b = translate(g, b, center);
      return inner_l2(g, decomp.epsilon.u1, a) +
             inner_l2(g, decomp.epsilon.u2, b);
    };
    out.plus.push_back(project(m.zp1, m.zp2));
    out.minus.push_back(project(m.zm1, m.zm2));
  }
  return out;
}

}  // namespace bqlab
