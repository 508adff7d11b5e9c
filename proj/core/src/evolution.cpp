#include "bqlab/evolution.hpp"

#include <cmath>
#include <complex>

#include "bqlab/errors.hpp"
#include "bqlab/soliton.hpp"

namespace bqlab {

namespace {

using cd = std::complex<double>;

// phi_k(z) = (e^z - sum_{j<k} z^j/j!) / z^k, with a Taylor branch near 0.
struct PhiValues {
  cd e, phi1, phi2, phi3;
};

PhiValues phi_functions(cd z) {
  PhiValues v;
  v.e = std::exp(z);
  if (std::abs(z) < 0.5) {
    cd t1 = 0, t2 = 0, t3 = 0, zp = 1;
    double f1 = 1, f2 = 2, f3 = 6;  // (k+1)!, (k+2)!, (k+3)! running values
    for (int k = 0; k <= 20; ++k) {
      t1 += zp / f1;
      t2 += zp / f2;
      t3 += zp / f3;
      zp *= z;
      f1 *= k + 2;
      f2 *= k + 3;
      f3 *= k + 4;
    }
    v.phi1 = t1;
    v.phi2 = t2;
    v.phi3 = t3;
  } else {
    v.phi1 = (v.e - 1.0) / z;
    v.phi2 = (v.e - 1.0 - z) / (z * z);
    v.phi3 = (v.e - 1.0 - z - 0.5 * z * z) / (z * z * z);
  }
  return v;
}

// The linear symbol per wavenumber k is A = [[0, ik], [ik(1+k^2), 0]] with
// A^2 = -W^2 I, W = k sqrt(1+k^2). Any entire f gives
// f(dt A) = Re f(i W dt) I + (Im f(i W dt)/W) A, so each operator needed by
// the scheme is two real coefficients per mode.
struct Coeff {
  Eigen::ArrayXd a, b;
};

struct SpectralPair {
  Eigen::ArrayXcd v1, v2;
};

class StepOperator {
 public:
  StepOperator(const Grid& grid, double dt, double p, bool dealias)
      : grid_(grid), dt_(dt), p_(p) {
    const auto& kh = grid.wavenumbers_half();
    const int nm = static_cast<int>(kh.size());
    const int n = grid.n_points();
    for (Coeff* c : {&E_, &E2_, &Q_, &F1_, &F2_, &F3_}) {
      c->a.resize(nm);
      c->b.resize(nm);
    }
    mask_ = Eigen::ArrayXd::Ones(nm);
    mask_[nm - 1] = 0.0;  // Nyquist carries no usable odd-derivative mode
    if (dealias) {
      for (int m = 0; m < nm; ++m)
        if (3 * m > n) mask_[m] = 0.0;  // 2/3 rule on the nonlinear product
    }
    for (int m = 0; m < nm; ++m) {
      const double k = kh[m];
      const double w = k * std::sqrt(1.0 + k * k);
      set(m, w, k);
    }
  }

  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }

  SpectralPair to_spectral(const FieldState& s) const {
    SpectralPair v{rfft(grid_, s.u1), rfft(grid_, s.u2)};
    // Keep the evolution on the Nyquist-free subspace.
    v.v1[v.v1.size() - 1] = 0.0;
    v.v2[v.v2.size() - 1] = 0.0;
    return v;
  }

  FieldState to_physical(const SpectralPair& v, double t) const {
    FieldState s;
    s.u1 = irfft(grid_, v.v1);
    s.u2 = irfft(grid_, v.v2);
    s.time = t;
    return s;
  }

  // Nonlinear term N(v) = (0, -ik * mask * F|u1|^2p u1).
  SpectralPair nonlinear(const SpectralPair& v) const {
    Eigen::ArrayXd u1 = irfft(grid_, v.v1);
    Eigen::ArrayXcd f = rfft(grid_, power_nonlinearity(u1, p_));
    const auto& kh = grid_.wavenumbers_half();
    SpectralPair out;
    out.v1 = Eigen::ArrayXcd::Zero(f.size());
    out.v2.resize(f.size());
    for (int m = 0; m < f.size(); ++m)
      out.v2[m] = cd(0, -kh[m]) * mask_[m] * f[m];
    return out;
  }

  SpectralPair apply(const Coeff& c, const SpectralPair& v) const {
    const auto& kh = grid_.wavenumbers_half();
    SpectralPair out;
    out.v1.resize(v.v1.size());
    out.v2.resize(v.v2.size());
    for (int m = 0; m < v.v1.size(); ++m) {
      const double k = kh[m];
      const cd av1 = cd(0, k) * v.v2[m];
      const cd av2 = cd(0, k * (1.0 + k * k)) * v.v1[m];
      out.v1[m] = c.a[m] * v.v1[m] + c.b[m] * av1;
      out.v2[m] = c.a[m] * v.v2[m] + c.b[m] * av2;
    }
    return out;
  }

  // One ETDRK4 step (Cox-Matthews tableau) in spectral variables.
  SpectralPair advance(const SpectralPair& u) const {
    SpectralPair nu = nonlinear(u);
    SpectralPair a = add(apply(E2_, u), apply(Q_, nu));
    SpectralPair na = nonlinear(a);
    SpectralPair b = add(apply(E2_, u), apply(Q_, na));
    SpectralPair nb = nonlinear(b);
    SpectralPair c = add(apply(E2_, a), apply(Q_, axpy(2.0, nb, -1.0, nu)));
    SpectralPair nc = nonlinear(c);
    SpectralPair out = add(apply(E_, u), apply(F1_, nu));
    out = add(out, apply(F2_, add(na, nb)));
    return add(out, apply(F3_, nc));
  }

  double spectral_h_norm_sq(const SpectralPair& v) const {
    const auto& kh = grid_.wavenumbers_half();
    const int n = grid_.n_points();
    double s = 0;
    for (int m = 0; m < v.v1.size(); ++m) {
      const double wgt = (m == 0 || m == v.v1.size() - 1) ? 1.0 : 2.0;
      const double k2 = kh[m] * kh[m];
      s += wgt * ((1.0 + k2) * std::norm(v.v1[m]) + std::norm(v.v2[m]));
    }
    return s * 2.0 * grid_.half_length() / (static_cast<double>(n) * n);
  }

 private:
  static SpectralPair add(const SpectralPair& a, const SpectralPair& b) {
    return {a.v1 + b.v1, a.v2 + b.v2};
  }
  static SpectralPair axpy(double ca, const SpectralPair& a, double cb,
                           const SpectralPair& b) {
    return {ca * a.v1 + cb * b.v1, ca * a.v2 + cb * b.v2};
  }

  void set(int m, double w, double) {
    const cd z(0.0, w * dt_);
    const cd zh = 0.5 * z;
    const PhiValues full = phi_functions(z);
    const PhiValues half = phi_functions(zh);

    auto assign = [&](Coeff& c, cd val) {
      c.a[m] = val.real();
      c.b[m] = (w == 0.0) ? 0.0 : val.imag() / w;
    };
    assign(E_, full.e);
    assign(E2_, half.e);
    assign(Q_, 0.5 * dt_ * half.phi1);
    assign(F1_, dt_ * (full.phi1 - 3.0 * full.phi2 + 4.0 * full.phi3));
    assign(F2_, dt_ * (2.0 * full.phi2 - 4.0 * full.phi3));
    assign(F3_, dt_ * (4.0 * full.phi3 - full.phi2));
  }

  const Grid& grid_;
  double dt_, p_;
  Coeff E_, E2_, Q_, F1_, F2_, F3_;
  Eigen::ArrayXd mask_;
};

FieldState reversed(const FieldState& s) {
  FieldState r;
  r.grid = s.grid;
  r.u1 = s.u1;
  r.u2 = -s.u2;
  r.time = -s.time;
  return r;
}

Trajectory evolve_forward(const FieldState& initial, const EvolveConfig& cfg) {
  const Grid& g = *initial.grid;
  if (!initial.finite())
    throw BlowupError(initial.time, "evolve: non-finite initial state");
  if (!(cfg.t_end > initial.time))
    throw ContractError("evolve: t_end must exceed the initial time");

  const double span = cfg.t_end - initial.time;
  double dt = cfg.dt > 0 ? cfg.dt : default_dt(g);
  const long n_steps = std::max<long>(1, std::lround(span / dt));
  dt = span / static_cast<double>(n_steps);  // land on t_end exactly
  const long stride = cfg.checkpoint_stride > 0
                          ? cfg.checkpoint_stride
                          : std::max<long>(1, n_steps / 100);

  StepOperator op(g, dt, cfg.nonlinearity_p, cfg.dealias);
  SpectralPair v = op.to_spectral(initial);
  double norm_sq = op.spectral_h_norm_sq(v);

  Trajectory traj;
  traj.dt_used = dt;
  traj.steps = n_steps;
  auto checkpoint = [&](long step_idx) {
    FieldState s = op.to_physical(v, initial.time + step_idx * dt);
    s.grid = initial.grid;
    traj.states.push_back(std::move(s));
  };
  checkpoint(0);

  for (long i = 1; i <= n_steps; ++i) {
    v = op.advance(v);
    const double t = initial.time + i * dt;
    const double next_sq = op.spectral_h_norm_sq(v);
    if (!std::isfinite(next_sq) ||
        (norm_sq > 0 && next_sq > 100.0 * norm_sq && next_sq > 1e-12))
      throw BlowupError(t, "evolve: H-norm grew more than tenfold in one step");
    norm_sq = next_sq;
    if (i % stride == 0 || i == n_steps) checkpoint(i);
  }
  return traj;
}

}  // namespace

double default_dt(const Grid& grid) {
  const double kmax = M_PI * (grid.n_points() / 2) / grid.half_length();
  return 10.0 / (1.0 + kmax * std::sqrt(1.0 + kmax * kmax));
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> rhs(const FieldState& state,
                                              double p) {
  if (!state.finite()) throw BlowupError(state.time, "rhs: non-finite state");
  const Grid& g = *state.grid;
  Eigen::ArrayXd du1 = spectral_derivative(g, state.u2, 1);
  Eigen::ArrayXd inner = state.u1 - spectral_derivative(g, state.u1, 2) -
                         power_nonlinearity(state.u1, p);
  Eigen::ArrayXd du2 = spectral_derivative(g, inner, 1);
  return {std::move(du1), std::move(du2)};
}

FieldState step(const FieldState& state, const EvolveConfig& cfg) {
  if (!(cfg.dt > 0)) throw ContractError("step: dt must be > 0");
  if (cfg.direction == Direction::backward) {
    EvolveConfig fwd = cfg;
    fwd.direction = Direction::forward;
    FieldState r = step(reversed(state), fwd);
    return reversed(r);
  }
  StepOperator op(*state.grid, cfg.dt, cfg.nonlinearity_p, cfg.dealias);
  SpectralPair v = op.to_spectral(state);
  const double before = op.spectral_h_norm_sq(v);
  v = op.advance(v);
  const double after = op.spectral_h_norm_sq(v);
  if (!std::isfinite(after) || (before > 0 && after > 100.0 * before && after > 1e-12))
    throw BlowupError(state.time + cfg.dt, "step: H-norm grew more than tenfold");
  FieldState out = op.to_physical(v, state.time + cfg.dt);
  out.grid = state.grid;
  return out;
}

Trajectory evolve(const FieldState& initial, const EvolveConfig& cfg) {
  if (cfg.direction == Direction::backward)
    return evolve_backward_from_final(initial, cfg.t_end, cfg);
  return evolve_forward(initial, cfg);
}

Trajectory evolve_backward_from_final(const FieldState& final_state,
                                      double t_start, const EvolveConfig& cfg) {
  if (!(t_start < final_state.time))
    throw ContractError("evolve_backward_from_final: t_start must precede "
                        "the final time");
  EvolveConfig fwd = cfg;
  fwd.direction = Direction::forward;
  fwd.t_end = -t_start;
  Trajectory rev = evolve_forward(reversed(final_state), fwd);
  Trajectory out;
  out.dt_used = rev.dt_used;
  out.steps = rev.steps;
  out.states.reserve(rev.states.size());
  for (auto it = rev.states.rbegin(); it != rev.states.rend(); ++it) {
    FieldState s = reversed(*it);
    s.grid = final_state.grid;
    out.states.push_back(std::move(s));
  }
  return out;
}

}  // namespace bqlab
