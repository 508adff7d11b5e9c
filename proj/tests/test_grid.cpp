#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bqlab/errors.hpp"
#include "bqlab/grid.hpp"
#include "oracles.hpp"

using namespace bqlab;

TEST_CASE("grid construction and invariants") {
  auto g = make_grid(40.0, 1024);
  CHECK(g->spacing() * g->n_points() == doctest::Approx(80.0).epsilon(1e-15));
  CHECK(g->x()[0] == -40.0);
  // wavenumbers antisymmetric about zero except the Nyquist mode
  const auto& k = g->wavenumbers();
  for (int m = 1; m < 512; ++m) CHECK(k[m] == -k[1024 - m]);
  CHECK(k[512] == -512 * M_PI / 40.0);

  CHECK_THROWS_AS(Grid::make(40.0, 15), ContractError);
  CHECK_THROWS_AS(Grid::make(40.0, 14), ContractError);
  CHECK_THROWS_AS(Grid::make(-1.0, 64), ContractError);
}

TEST_CASE("spectral derivative is exact on resolvable modes") {
  auto g = make_grid(40.0, 256);
  Eigen::ArrayXd f = (M_PI * g->x() / 40.0).sin();
  Eigen::ArrayXd ref = (M_PI / 40.0) * (M_PI * g->x() / 40.0).cos();
  CHECK((spectral_derivative(*g, f, 1) - ref).abs().maxCoeff() < 1e-13);

  Eigen::ArrayXd one = Eigen::ArrayXd::Ones(256);
  for (int order = 1; order <= 4; ++order)
    CHECK(spectral_derivative(*g, one, order).abs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(spectral_derivative(*g, Eigen::ArrayXd::Zero(100), 1),
                  ContractError);
  CHECK_THROWS_AS(spectral_derivative(*g, f, 5), ContractError);
}

TEST_CASE("second derivative of the ground state matches the ODE rearrangement") {
  // -Phi'' + Phi - Phi^3 = 0, so Phi'' = Phi - Phi^3 pointwise.
  auto g = make_grid(40.0, 1024);
  Eigen::ArrayXd phi(1024), ref(1024);
  for (int i = 0; i < 1024; ++i) {
    const double v = oracle::phi_p1(g->x()[i]);
    phi[i] = v;
    ref[i] = v - v * v * v;
  }
  CHECK((spectral_derivative(*g, phi, 2) - ref).abs().maxCoeff() < 1e-10);
}

TEST_CASE("quadrature against analytic antiderivatives") {
  auto g = make_grid(40.0, 1024);
  CHECK(quadrature(*g, Eigen::ArrayXd::Zero(1024)) == 0.0);

  Eigen::ArrayXd s2 = 2.0 / g->x().cosh().square();
  // antiderivative 2 tanh evaluated at the ends
  const double expected = 2.0 * (std::tanh(40.0) - std::tanh(-40.0));
  CHECK(std::abs(quadrature(*g, s2) - expected) < 1e-10);
  CHECK(std::abs(quadrature(*g, s2) - 4.0) < 1e-10);

  Eigen::ArrayXd c = (M_PI * g->x() / 40.0).cos();
  CHECK(std::abs(quadrature(*g, c)) < 1e-12);
}

TEST_CASE("h_norm values and homogeneity") {
  auto g = make_grid(40.0, 1024);
  FieldState zero = FieldState::zero(g);
  CHECK(h_norm(zero) == 0.0);

  FieldState s = FieldState::zero(g);
  for (int i = 0; i < 1024; ++i) s.u1[i] = oracle::phi_p1(g->x()[i]);
  // |Phi|^2 = 4 and |Phi'|^2 = 4/3 for p = 1, omega = 0
  const double expected =
      std::sqrt(oracle::kPhiL2SqP1 + oracle::kPhiDxL2SqP1);
  CHECK(h_norm(s) == doctest::Approx(expected).epsilon(1e-12));

  // cross-check the closed forms against the quadrature oracle itself
  Eigen::ArrayXd dphi(1024);
  for (int i = 0; i < 1024; ++i) dphi[i] = oracle::phi_p1_dx(g->x()[i]);
  CHECK(quadrature(*g, s.u1.square()) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(quadrature(*g, dphi.square()) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-10));

  FieldState d = s;
  d.u1 *= 2.0;
  d.u2 = s.u1;  // nonzero second component
  s.u2 = 0.5 * s.u1;
  d.u2 = 2.0 * s.u2;
  CHECK(h_norm(d) == doctest::Approx(2.0 * h_norm(s)).epsilon(1e-13));
}

TEST_CASE("triangle inequality and homogeneity on random states") {
  auto g = make_grid(20.0, 128);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    FieldState a = FieldState::zero(g), b = FieldState::zero(g);
    a.u1 = oracle::random_smooth_field(*g, 100 + trial);
    a.u2 = oracle::random_smooth_field(*g, 200 + trial);
    b.u1 = oracle::random_smooth_field(*g, 300 + trial);
    b.u2 = oracle::random_smooth_field(*g, 400 + trial);
    FieldState sum = a;
    sum.u1 += b.u1;
    sum.u2 += b.u2;
    CHECK(h_norm(sum) <= h_norm(a) + h_norm(b) + 1e-12);
    const double c = coeff(rng);
    FieldState scaled = a;
    scaled.u1 *= c;
    scaled.u2 *= c;
    CHECK(h_norm(scaled) ==
          doctest::Approx(std::abs(c) * h_norm(a)).epsilon(1e-12));
  }
}

TEST_CASE("Parseval identity for the real transform") {
  auto g = make_grid(25.0, 512);
  Eigen::ArrayXd f = oracle::random_smooth_field(*g, 42);
  Eigen::ArrayXcd spec = rfft(*g, f);
  double sum = 0;
  for (int m = 0; m < spec.size(); ++m) {
    const double w = (m == 0 || m == spec.size() - 1) ? 1.0 : 2.0;
    sum += w * std::norm(spec[m]);
  }
  const double lhs = quadrature(*g, f.square());
  const double rhs = 2.0 * g->half_length() / (512.0 * 512.0) * sum;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("first derivative applied twice equals second derivative") {
  auto g = make_grid(25.0, 512);
  Eigen::ArrayXd f = oracle::random_smooth_field(*g, 11);
  Eigen::ArrayXd d11 = spectral_derivative(*g, spectral_derivative(*g, f, 1), 1);
  Eigen::ArrayXd d2 = spectral_derivative(*g, f, 2);
  CHECK((d11 - d2).abs().maxCoeff() / d2.abs().maxCoeff() < 1e-10);
}

TEST_CASE("translate shifts by whole cells exactly") {
  auto g = make_grid(20.0, 128);
  Eigen::ArrayXd f = oracle::random_smooth_field(*g, 5);
  Eigen::ArrayXd shifted = translate(*g, f, 7 * g->spacing());
  for (int i = 0; i < 128; ++i)
    CHECK(shifted[i] == doctest::Approx(f[(i - 7 + 128) % 128]).epsilon(1e-11));
}

TEST_CASE("resample reproduces values on the same grid and across grids") {
  auto g1 = make_grid(20.0, 128);
  auto g2 = make_grid(30.0, 512);
  Eigen::ArrayXd f = oracle::bump(*g1, 3.0);
  Eigen::ArrayXd same = resample(*g1, f, *g1);
  CHECK((same - f).abs().maxCoeff() < 1e-12);

  Eigen::ArrayXd wide = resample(*g1, f, *g2);
  for (int i = 0; i < g2->n_points(); ++i) {
    const double x = g2->x()[i];
    if (std::abs(x) > 12.0) continue;  // inside the source domain, tails small
    CHECK(wide[i] == doctest::Approx(std::exp(-std::pow((x - 3.0) / 1.5, 2)))
                         .epsilon(1e-8));
  }
}

TEST_CASE("derivative matrix agrees with the transform path") {
  auto g = make_grid(15.0, 64);
  Eigen::ArrayXd f = oracle::random_smooth_field(*g, 3);
  for (int order : {1, 2}) {
    Eigen::MatrixXd D = derivative_matrix(*g, order);
    Eigen::ArrayXd via_matrix = (D * f.matrix()).array();
    Eigen::ArrayXd via_fft = spectral_derivative(*g, f, order);
    CHECK((via_matrix - via_fft).abs().maxCoeff() < 1e-10);
  }
}
