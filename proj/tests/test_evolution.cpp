#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bqlab/errors.hpp"
#include "bqlab/evolution.hpp"
#include "bqlab/functionals.hpp"
#include "bqlab/soliton.hpp"
#include "oracles.hpp"

using namespace bqlab;

namespace {

FieldState traveling_soliton(GridPtr g, double omega, double x0, double t) {
  SolitonFamily fam = SolitonFamily::make(1.0, {SolitonParams{1.0, omega, x0}});
  return soliton_sum(fam, g, t);
}

}  // namespace

TEST_CASE("rhs satisfies the traveling-wave identity") {
  auto g = make_grid(45.0, 1024);
  const double w = 0.5, x0 = 1.0, t = 2.0;
  FieldState s = traveling_soliton(g, w, x0, t);
  auto [du1, du2] = rhs(s, 1.0);
  // exact time derivative of the translate: (-w Phi', w^2 Phi')
  const double c = w * t + x0;
  for (int i = 0; i < g->n_points(); i += 7) {
    const double d = oracle::phi_omega_p1_dx(w, g->x()[i] - c);
    CHECK(du1[i] == doctest::Approx(-w * d).epsilon(0).scale(1).epsilon(1e-9));
    CHECK(std::abs(du1[i] + w * d) < 1e-9);
    CHECK(std::abs(du2[i] - w * w * d) < 1e-9);
  }
}

TEST_CASE("rhs degenerate cases") {
  auto g = make_grid(20.0, 128);
  FieldState zero = FieldState::zero(g);
  auto [z1, z2] = rhs(zero, 1.0);
  CHECK(z1.abs().maxCoeff() == 0.0);
  CHECK(z2.abs().maxCoeff() == 0.0);

  // u1 = 0: du2 = 0, and the momentum derivative int (dx u2) u2 vanishes
  FieldState s = FieldState::zero(g);
  s.u2 = oracle::random_smooth_field(*g, 9);
  auto [d1, d2] = rhs(s, 1.0);
  CHECK(d2.abs().maxCoeff() == 0.0);
  CHECK(std::abs(inner_l2(*g, d1, s.u2)) < 1e-12);

  FieldState bad = s;
  bad.u1[3] = std::nan("");
  CHECK_THROWS_AS(rhs(bad, 1.0), BlowupError);
}

TEST_CASE("soliton advances 1000 steps within tolerance") {
  auto g = make_grid(35.0, 512);
  FieldState init = traveling_soliton(g, 0.5, 0.0, 0.0);
  EvolveConfig cfg;
  cfg.dt = 2e-3;
  cfg.nonlinearity_p = 1.0;
  FieldState s = init;
  for (int i = 0; i < 1000; ++i) s = step(s, cfg);
  CHECK(s.time == doctest::Approx(2.0).epsilon(1e-12));
  FieldState exact = traveling_soliton(g, 0.5, 0.0, 2.0);
  CHECK((s.u1 - exact.u1).abs().maxCoeff() < 1e-6);
}

TEST_CASE("one-step error drops sixteenfold when dt halves") {
  auto g = make_grid(30.0, 256);
  FieldState s = FieldState::zero(g);
  s.u1 = oracle::random_smooth_field(*g, 21, 0.3);
  s.u2 = oracle::random_smooth_field(*g, 22, 0.3);
  EvolveConfig cfg;
  cfg.nonlinearity_p = 1.0;

  auto advance = [&](double dt, int steps) {
    EvolveConfig c = cfg;
    c.dt = dt;
    FieldState out = s;
    for (int i = 0; i < steps; ++i) out = step(out, c);
    return out;
  };
  const double dt = 0.02;
  FieldState ref = advance(dt / 8, 8);
  FieldState coarse = advance(dt, 1);
  FieldState fine = advance(dt / 2, 2);
  const double e1 = h_norm_pair(*g, coarse.u1 - ref.u1, coarse.u2 - ref.u2);
  const double e2 = h_norm_pair(*g, fine.u1 - ref.u1, fine.u2 - ref.u2);
  CHECK(e1 / e2 > 10.0);
  CHECK(e1 / e2 < 24.0);
}

TEST_CASE("single forward-backward step returns the state") {
  auto g = make_grid(30.0, 256);
  FieldState s = FieldState::zero(g);
  s.u1 = oracle::random_smooth_field(*g, 31, 0.3);
  s.u2 = oracle::random_smooth_field(*g, 32, 0.3);
  EvolveConfig fwd;
  fwd.dt = 5e-3;
  fwd.nonlinearity_p = 1.0;
  EvolveConfig bwd = fwd;
  bwd.direction = Direction::backward;
  FieldState back = step(step(s, fwd), bwd);
  CHECK(h_norm_pair(*g, back.u1 - s.u1, back.u2 - s.u2) < 1e-10);
  CHECK(back.time == doctest::Approx(s.time).epsilon(1e-14));
}

TEST_CASE("energy drift per step stays at rounding level for resolved states") {
  auto g = make_grid(35.0, 512);
  FieldState s = traveling_soliton(g, 0.5, 0.0, 0.0);
  EvolveConfig cfg;
  cfg.dt = 2e-3;
  cfg.nonlinearity_p = 1.0;
  const double e0 = energy(s, 1.0);
  FieldState s1 = step(s, cfg);
  CHECK(std::abs(energy(s1, 1.0) - e0) / std::abs(e0) < 1e-12);
}

TEST_CASE("forward evolution conserves energy and momentum") {
  auto g = make_grid(35.0, 512);
  FieldState init = traveling_soliton(g, 0.5, 0.0, 0.0);
  // small perturbation: this speed sits in the strongly unstable range and a
  // 1e-2 bump genuinely blows up near t = 10
  init.u1 += 1e-4 * oracle::bump(*g, -3.0);
  EvolveConfig cfg;
  cfg.t_end = 8.0;
  cfg.dt = 5e-3;
  cfg.nonlinearity_p = 1.0;
  Trajectory traj = evolve(init, cfg);
  const double e0 = energy(init, 1.0), m0 = momentum(init);
  const double e1 = energy(traj.back(), 1.0), m1 = momentum(traj.back());
  CHECK(std::abs(e1 - e0) <= 1e-8 * std::abs(e0));
  CHECK(std::abs(m1 - m0) <= 1e-8 * (1.0 + std::abs(m0)));
}

TEST_CASE("solver commutes with whole-cell translation") {
  auto g = make_grid(30.0, 256);
  const int n = 256, shift = 11;
  FieldState a = FieldState::zero(g);
  a.u1 = 0.5 * oracle::bump(*g, 0.0);
  a.u2 = 0.2 * oracle::bump(*g, 1.0);
  FieldState b = FieldState::zero(g);
  for (int i = 0; i < n; ++i) {
    b.u1[(i + shift) % n] = a.u1[i];
    b.u2[(i + shift) % n] = a.u2[i];
  }
  EvolveConfig cfg;
  cfg.t_end = 1.0;
  cfg.nonlinearity_p = 1.0;
  FieldState ea = evolve(a, cfg).back();
  FieldState eb = evolve(b, cfg).back();
  double worst = 0;
  for (int i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(eb.u1[(i + shift) % n] - ea.u1[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("argmax tracking recovers the wave speed") {
  auto g = make_grid(50.0, 1024);
  FieldState init = traveling_soliton(g, 0.5, 0.0, 0.0);
  EvolveConfig cfg;
  cfg.t_end = 20.0;
  cfg.dt = 5e-3;
  cfg.nonlinearity_p = 1.0;
  cfg.checkpoint_stride = 200;  // one per unit time
  Trajectory traj = evolve(init, cfg);
  double st = 0, sx = 0, stt = 0, stx = 0;
  int cnt = 0;
  for (const auto& s : traj.states) {
    int imax;
    s.u1.maxCoeff(&imax);
    // parabolic refinement of the peak position
    const double ym = s.u1[(imax - 1 + 1024) % 1024], y0 = s.u1[imax],
                 yp = s.u1[(imax + 1) % 1024];
    const double frac = 0.5 * (ym - yp) / (ym - 2 * y0 + yp);
    const double xpk = g->x()[imax] + frac * g->spacing();
    st += s.time;
    sx += xpk;
    stt += s.time * s.time;
    stx += s.time * xpk;
    ++cnt;
  }
  const double speed = (cnt * stx - st * sx) / (cnt * stt - st * st);
  CHECK(std::abs(speed - 0.5) < 1e-4);
}

TEST_CASE("backward evolution from a final soliton state") {
  auto g = make_grid(35.0, 512);
  const double T = 5.0;
  FieldState fin = traveling_soliton(g, 0.5, 0.0, T);
  EvolveConfig cfg;
  cfg.dt = 2e-3;
  cfg.nonlinearity_p = 1.0;
  Trajectory traj = evolve_backward_from_final(fin, 0.0, cfg);
  CHECK(traj.states.front().time == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(traj.states.back().time == doctest::Approx(T).epsilon(1e-12));
  FieldState exact = traveling_soliton(g, 0.5, 0.0, 0.0);
  CHECK((traj.states.front().u1 - exact.u1).abs().maxCoeff() < 1e-6);

  // zero data stays zero
  FieldState zf = FieldState::zero(g, T);
  Trajectory zt = evolve_backward_from_final(zf, 0.0, cfg);
  CHECK(h_norm(zt.states.front()) == 0.0);
}

TEST_CASE("forward-backward round trip over several units") {
  auto g = make_grid(35.0, 512);
  FieldState init = traveling_soliton(g, 0.5, 0.0, 0.0);
  EvolveConfig cfg;
  cfg.t_end = 5.0;
  cfg.dt = 1e-3;
  cfg.nonlinearity_p = 1.0;
  Trajectory fwd = evolve(init, cfg);
  Trajectory back = evolve_backward_from_final(fwd.back(), 0.0, cfg);
  CHECK(h_norm_pair(*g, back.states.front().u1 - init.u1,
                    back.states.front().u2 - init.u2) < 1e-9);
}

TEST_CASE("config validation and defaults") {
  auto g = make_grid(35.0, 512);
  CHECK(default_dt(*g) > 0);
  FieldState s = FieldState::zero(g, 1.0);
  EvolveConfig cfg;
  cfg.t_end = 0.5;
  CHECK_THROWS_AS(evolve(s, cfg), ContractError);
  EvolveConfig sc;
  sc.dt = 0.0;
  CHECK_THROWS_AS(step(s, sc), ContractError);
}
