#include "bqlab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include "bqlab/errors.hpp"

namespace bqlab {

namespace {

// Process-wide FFTW plan cache. Plans are created with FFTW_ESTIMATE for
// run-to-run determinism and FFTW_UNALIGNED so they may execute on any
// caller buffer via the new-array interface. Creation is serialized; execution
// of existing plans is thread-safe.
struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

PlanPair& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  PlanPair p;
  std::vector<double> re(static_cast<size_t>(n));
  std::vector<std::complex<double>> sp(static_cast<size_t>(n) / 2 + 1);
  auto* c = reinterpret_cast<fftw_complex*>(sp.data());
  p.r2c = fftw_plan_dft_r2c_1d(n, re.data(), c,
                               FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
  p.c2r = fftw_plan_dft_c2r_1d(n, c, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.r2c || !p.c2r) throw Error("fftw plan creation failed");
  return cache.emplace(n, p).first->second;
}

void check_length(const Grid& g, const Eigen::ArrayXd& f, const char* op) {
  if (f.size() != g.n_points())
    throw ContractError(std::string(op) + ": field length " +
                        std::to_string(f.size()) + " does not match grid n=" +
                        std::to_string(g.n_points()));
}

}  // namespace

Grid Grid::make(double half_length, int n_points) {
  if (!(half_length > 0)) throw ContractError("grid: half_length must be > 0");
  if (n_points < 16 || n_points % 2 != 0)
    throw ContractError("grid: n_points must be even and >= 16, got " +
                        std::to_string(n_points));
  Grid g;
  g.half_length_ = half_length;
  g.n_ = n_points;
  g.spacing_ = 2.0 * half_length / n_points;
  g.x_ = Eigen::ArrayXd::LinSpaced(n_points, 0, n_points - 1) * g.spacing_ -
         half_length;
  g.k_.resize(n_points);
  const double dk = M_PI / half_length;
  for (int m = 0; m < n_points; ++m) {
    int mm = (m <= n_points / 2 - 1) ? m : m - n_points;
    if (m == n_points / 2) mm = -n_points / 2;
    g.k_[m] = dk * mm;
  }
  g.k_half_ = dk * Eigen::ArrayXd::LinSpaced(n_points / 2 + 1, 0, n_points / 2);
  return g;
}

GridPtr make_grid(double half_length, int n_points) {
  return std::make_shared<const Grid>(Grid::make(half_length, n_points));
}

FieldState FieldState::zero(GridPtr g, double t) {
  FieldState s;
  s.u1 = Eigen::ArrayXd::Zero(g->n_points());
  s.u2 = Eigen::ArrayXd::Zero(g->n_points());
  s.grid = std::move(g);
  s.time = t;
  return s;
}

bool FieldState::finite() const {
  return u1.isFinite().all() && u2.isFinite().all() && std::isfinite(time);
}

Eigen::ArrayXcd rfft(const Grid& g, const Eigen::ArrayXd& f) {
  check_length(g, f, "rfft");
  const int n = g.n_points();
  Eigen::ArrayXcd out(n / 2 + 1);
  fftw_execute_dft_r2c(plans_for(n).r2c, const_cast<double*>(f.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::ArrayXd irfft(const Grid& g, const Eigen::ArrayXcd& spec) {
  const int n = g.n_points();
  if (spec.size() != n / 2 + 1)
    throw ContractError("irfft: spectrum length mismatch");
  Eigen::ArrayXcd tmp = spec;  // c2r destroys its input
  Eigen::ArrayXd out(n);
  fftw_execute_dft_c2r(plans_for(n).c2r,
                       reinterpret_cast<fftw_complex*>(tmp.data()), out.data());
  return out / n;
}

Eigen::ArrayXd spectral_derivative(const Grid& g, const Eigen::ArrayXd& f,
                                   int order) {
  check_length(g, f, "spectral_derivative");
  if (order < 1 || order > 4)
    throw ContractError("spectral_derivative: order must be in {1,2,3,4}");
  Eigen::ArrayXcd spec = rfft(g, f);
  const auto& kh = g.wavenumbers_half();
  const std::complex<double> I(0, 1);
  for (int m = 0; m < spec.size(); ++m)
    spec[m] *= std::pow(I * kh[m], order);
  if (order % 2 == 1) spec[spec.size() - 1] = 0.0;  // Nyquist
  return irfft(g, spec);
}

double quadrature(const Grid& g, const Eigen::ArrayXd& f) {
  check_length(g, f, "quadrature");
  return g.spacing() * f.sum();
}

double inner_l2(const Grid& g, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  check_length(g, a, "inner_l2");
  check_length(g, b, "inner_l2");
  return g.spacing() * (a * b).sum();
}

double inner_pair(const Grid& g, const Eigen::ArrayXd& a1,
                  const Eigen::ArrayXd& a2, const Eigen::ArrayXd& b1,
                  const Eigen::ArrayXd& b2) {
  return inner_l2(g, a1, b1) + inner_l2(g, a2, b2);
}

double h_norm_pair(const Grid& g, const Eigen::ArrayXd& u1,
                   const Eigen::ArrayXd& u2) {
  Eigen::ArrayXd du1 = spectral_derivative(g, u1, 1);
  double s = inner_l2(g, u1, u1) + inner_l2(g, du1, du1) + inner_l2(g, u2, u2);
  return std::sqrt(std::max(0.0, s));
}

double h_norm(const FieldState& state) {
  return h_norm_pair(*state.grid, state.u1, state.u2);
}

Eigen::ArrayXd translate(const Grid& g, const Eigen::ArrayXd& f, double shift) {
  Eigen::ArrayXcd spec = rfft(g, f);
  const auto& kh = g.wavenumbers_half();
  const std::complex<double> I(0, 1);
  for (int m = 0; m < spec.size(); ++m) spec[m] *= std::exp(-I * kh[m] * shift);
  // A shifted Nyquist mode has no real representative; drop it.
  spec[spec.size() - 1] = 0.0;
  return irfft(g, spec);
}

Eigen::ArrayXd resample(const Grid& from, const Eigen::ArrayXd& f,
                        const Grid& to) {
  check_length(from, f, "resample");
  Eigen::ArrayXcd spec = rfft(from, f);
  const auto& kh = from.wavenumbers_half();
  const int nm = static_cast<int>(spec.size());
  const double L = from.half_length();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(to.n_points());
  for (int i = 0; i < to.n_points(); ++i) {
    const double x = to.x()[i];
    if (x < -L || x >= L) continue;
    // DFT coefficients are indexed from the left edge, so the interpolant
    // phase is k*(x + L).
    const double xi = x + L;
    std::complex<double> acc = spec[0];
    for (int m = 1; m < nm - 1; ++m)
      acc += 2.0 * spec[m] * std::exp(std::complex<double>(0, kh[m] * xi));
    acc += spec[nm - 1] * std::cos(kh[nm - 1] * xi);
    out[i] = acc.real() / from.n_points();
  }
  return out;
}

Eigen::MatrixXd derivative_matrix(const Grid& g, int order) {
  const int n = g.n_points();
  // First column of the circulant: inverse transform of the symbol (ik)^order.
  Eigen::ArrayXcd symbol(n / 2 + 1);
  const auto& kh = g.wavenumbers_half();
  const std::complex<double> I(0, 1);
  for (int m = 0; m <= n / 2; ++m) symbol[m] = std::pow(I * kh[m], order);
  if (order % 2 == 1) symbol[n / 2] = 0.0;
  Eigen::ArrayXd col = irfft(g, symbol);
  Eigen::MatrixXd D(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D(i, j) = col[(i - j + n) % n];
  return D;
}

}  // namespace bqlab
