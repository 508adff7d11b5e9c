#include "bqlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "bqlab/errors.hpp"

namespace bqlab {

namespace {

Eigen::MatrixXd circulant_from_half_symbol(const Grid& g,
                                           const Eigen::ArrayXcd& symbol) {
  Eigen::ArrayXd col = irfft(g, symbol);
  const int n = g.n_points();
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = col[(i - j + n) % n];
  return M;
}

// +k^2 with the Nyquist mode zeroed, matching h_norm's first derivative.
Eigen::MatrixXd grad_squared_matrix(const Grid& g) {
  Eigen::ArrayXcd symbol = g.wavenumbers_half().square().cast<std::complex<double>>();
  symbol[symbol.size() - 1] = 0.0;
  return circulant_from_half_symbol(g, symbol);
}

Eigen::ArrayXd translation_mode_pair(const SolitonParams& s, const Grid& g) {
  Eigen::ArrayXd d = profile_dy(s, g.x());
  Eigen::ArrayXd v(2 * g.n_points());
  v << d, -s.omega * d;
  return v;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace

OperatorAssembly assemble_linearized(double p, double omega, GridPtr grid) {
  SolitonParams s{p, omega, 0.0};
  s.validate();
  if (!grid_resolves(*grid, s))
    throw ResolutionError("assemble_linearized: under-resolved profile");
  const int n = grid->n_points();
  Eigen::ArrayXd phi = profile(s, grid->x());
  Eigen::ArrayXd potential = (2 * p + 1) * phi.abs().pow(2.0 * p);

  OperatorAssembly A;
  A.grid = grid;
  A.p = p;
  A.omega = omega;
  A.matrix = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.matrix.topLeftCorner(n, n) = -derivative_matrix(*grid, 2);
  A.matrix.topLeftCorner(n, n).diagonal() += (1.0 - potential).matrix();
  A.matrix.topRightCorner(n, n).diagonal().setConstant(omega);
  A.matrix.bottomLeftCorner(n, n).diagonal().setConstant(omega);
  A.matrix.bottomRightCorner(n, n).diagonal().setOnes();
  A.matrix = 0.5 * (A.matrix + A.matrix.transpose()).eval();
  return A;
}

OperatorAssembly assemble_constant_coefficient(double omega, GridPtr grid) {
  const int n = grid->n_points();
  OperatorAssembly A;
  A.grid = grid;
  A.p = 0;
  A.omega = omega;
  A.matrix = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.matrix.topLeftCorner(n, n) = -derivative_matrix(*grid, 2);
  A.matrix.topLeftCorner(n, n).diagonal().array() += 1.0;
  A.matrix.topRightCorner(n, n).diagonal().setConstant(omega);
  A.matrix.bottomLeftCorner(n, n).diagonal().setConstant(omega);
  A.matrix.bottomRightCorner(n, n).diagonal().setOnes();
  A.matrix = 0.5 * (A.matrix + A.matrix.transpose()).eval();
  return A;
}

Eigen::MatrixXd scalar_operator(double p, double omega, const Grid& grid) {
  SolitonParams s{p, omega, 0.0};
  Eigen::ArrayXd phi = profile(s, grid.x());
  Eigen::MatrixXd M = -derivative_matrix(grid, 2);
  M.diagonal().array() +=
      (1.0 - omega * omega) - (2 * p + 1) * phi.abs().pow(2.0 * p);
  return 0.5 * (M + M.transpose().eval());
}

double quadratic_form(const OperatorAssembly& A, const Eigen::ArrayXd& w1,
                      const Eigen::ArrayXd& w2) {
  const int n = A.n();
  Eigen::VectorXd w(2 * n);
  w << w1.matrix(), w2.matrix();
  return A.grid->spacing() * w.dot(A.matrix * w);
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> apply_operator(
    const OperatorAssembly& A, const Eigen::ArrayXd& w1,
    const Eigen::ArrayXd& w2) {
  const int n = A.n();
  Eigen::VectorXd w(2 * n);
  w << w1.matrix(), w2.matrix();
  Eigen::VectorXd out = A.matrix * w;
  return {out.head(n).array(), out.tail(n).array()};
}

SpectrumReport certify_spectrum(const OperatorAssembly& A) {
  const int n = A.n();
  SpectrumReport rep;
  rep.p = A.p;
  rep.omega = A.omega;
  rep.n_points = n;
  rep.kernel_tolerance = 1e-8 * std::max(1.0, A.matrix.cwiseAbs().maxCoeff());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(A.matrix);
  if (full.info() != Eigen::Success)
    throw CertificationError("certify_spectrum: eigensolve failed");
  const Eigen::VectorXd& ev = full.eigenvalues();

  int zero_idx = -1;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -rep.kernel_tolerance)
      rep.negative_eigenvalues.push_back(ev[i]);
    else if (std::abs(ev[i]) <= rep.kernel_tolerance) {
      ++rep.n_zero_modes;
      zero_idx = i;
    }
  }
  rep.lambda0_numeric = ev[0];

  // Scalar reduction: the unique negative eigenvalue of the full operator is
  // lambda0 = (v + w^2 + 1 - sqrt(v^2 + 2(w^2-1)v + (w^2+1)^2))/2 with v the
  // scalar operator's ground eigenvalue.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> scal(
      scalar_operator(A.p, A.omega, *A.grid));
  rep.lambda_minus = scal.eigenvalues()[0];
  const double v = rep.lambda_minus, w2 = A.omega * A.omega;
  rep.lambda0_formula =
      0.5 * (v + w2 + 1.0 -
             std::sqrt(v * v + 2.0 * (w2 - 1.0) * v + (w2 + 1.0) * (w2 + 1.0)));

  if (zero_idx >= 0) {
    SolitonParams s{A.p, A.omega, 0.0};
    rep.kernel_correlation = cosine(full.eigenvectors().col(zero_idx),
                                    translation_mode_pair(s, *A.grid).matrix());
  }

  // Reconstruct the negative direction from the scalar ground state psi0 as
  // (psi0, w psi0/(lambda0-1)) and compare with the numeric eigenvector.
  {
    Eigen::VectorXd psi0 = scal.eigenvectors().col(0);
    Eigen::VectorXd gamma0(2 * n);
    gamma0 << psi0, (A.omega / (rep.lambda0_formula - 1.0)) * psi0;
    rep.gamma0_correlation = cosine(full.eigenvectors().col(0), gamma0);
  }

  if (rep.negative_eigenvalues.size() != 1)
    throw CertificationError(
        "certify_spectrum: expected exactly one negative eigenvalue, found " +
        std::to_string(rep.negative_eigenvalues.size()) +
        " (p=" + std::to_string(A.p) + ", omega=" + std::to_string(A.omega) +
        ")");
  if (rep.n_zero_modes != 1)
    throw CertificationError(
        "certify_spectrum: expected a one-dimensional kernel, found " +
        std::to_string(rep.n_zero_modes) + " zero modes");
  return rep;
}

namespace {

Eigen::MatrixXd symplectic_matrix(const Grid& g, const Eigen::MatrixXd& L) {
  const int n = g.n_points();
  Eigen::MatrixXd D1 = derivative_matrix(g, 1);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = D1;
  J.bottomLeftCorner(n, n) = D1;
  return J * L;
}

// Full L matrix without the resolution gate (used for coarse estimates).
Eigen::MatrixXd linearized_matrix_raw(double p, double omega, const Grid& g) {
  const int n = g.n_points();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = scalar_operator(p, omega, g);
  M.topLeftCorner(n, n).diagonal().array() += omega * omega;
  M.topRightCorner(n, n).diagonal().setConstant(omega);
  M.bottomLeftCorner(n, n).diagonal().setConstant(omega);
  M.bottomRightCorner(n, n).diagonal().setOnes();
  return M;
}

struct CandidateMode {
  double lambda = 0;
  Eigen::VectorXd vector;  // real eigenvector
};

// Dense nonsymmetric solve filtered to real positive eigenvalues with
// spatially decaying eigenvectors (discretized essential spectrum lives near
// the imaginary axis and its modes do not decay).
std::optional<CandidateMode> dense_unstable_mode(const Grid& g,
                                                 const Eigen::MatrixXd& JL) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(JL);
  if (es.info() != Eigen::Success)
    throw CertificationError("compute_pw_modes: eigensolve failed");
  const auto& vals = es.eigenvalues();
  const int n = g.n_points();
  const double L = g.half_length();
  int best = -1;
  for (int i = 0; i < vals.size(); ++i) {
    const double re = vals[i].real(), im = vals[i].imag();
    if (re < 1e-4 || std::abs(im) > 1e-8 * std::max(1.0, std::abs(re)))
      continue;
    Eigen::VectorXcd vec = es.eigenvectors().col(i);
    double tail = 0, peak = 0;
    for (int j = 0; j < 2 * n; ++j) {
      const double x = g.x()[j % n];
      const double mag = std::abs(vec[j]);
      peak = std::max(peak, mag);
      if (std::abs(x) > 0.85 * L) tail = std::max(tail, mag);
    }
    if (tail > 1e-3 * peak) continue;
    if (best < 0 || re > vals[best].real()) best = i;
  }
  if (best < 0) return std::nullopt;
  CandidateMode c;
  c.lambda = vals[best].real();
  Eigen::VectorXcd vc = es.eigenvectors().col(best);
  int imax = 0;
  for (int j = 1; j < vc.size(); ++j)
    if (std::abs(vc[j]) > std::abs(vc[imax])) imax = j;
  vc *= std::abs(vc[imax]) / vc[imax];
  c.vector = vc.real();
  c.vector.normalize();
  return c;
}

}  // namespace

std::optional<PegoWeinsteinModes> compute_pw_modes(const OperatorAssembly& A) {
  const int n = A.n();
  Eigen::MatrixXd JL = symplectic_matrix(*A.grid, A.matrix);

  // Dense solves get expensive past ~800 rows; estimate the eigenpair on a
  // coarsened grid, then sharpen it on the full grid by inverse iteration.
  std::optional<CandidateMode> cand;
  if (2 * n <= 1100) {
    cand = dense_unstable_mode(*A.grid, JL);
  } else {
    int nc = n;
    while (2 * nc > 1100) nc /= 2;
    GridPtr coarse = make_grid(A.grid->half_length(), nc);
    Eigen::MatrixXd JLc =
        symplectic_matrix(*coarse, linearized_matrix_raw(A.p, A.omega, *coarse));
    std::optional<CandidateMode> rough = dense_unstable_mode(*coarse, JLc);
    if (rough) {
      Eigen::VectorXd v(2 * n);
      v.head(n) = resample(*coarse, rough->vector.head(nc).array(), *A.grid);
      v.tail(n) = resample(*coarse, rough->vector.tail(nc).array(), *A.grid);
      v.normalize();
      double mu = rough->lambda;
      double resid = 1.0;
      for (int round = 0; round < 2 && resid > 1e-10; ++round) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(
            JL - mu * Eigen::MatrixXd::Identity(2 * n, 2 * n));
        double shift = mu;
        for (int it = 0; it < 10 && resid > 1e-12; ++it) {
          v = lu.solve(v);
          v.normalize();
          const Eigen::VectorXd Jv = JL * v;
          mu = v.dot(Jv);
          resid = (Jv - mu * v).norm();
        }
        (void)shift;
      }
      if (resid < 1e-7 && mu > 1e-4) cand = CandidateMode{mu, v};
    }
  }
  if (!cand) return std::nullopt;

  PegoWeinsteinModes m;
  m.lambda0 = cand->lambda;
  m.p = A.p;
  m.omega = A.omega;
  m.grid = A.grid;

  Eigen::VectorXd v = cand->vector;
  // Fix the leftover sign freedom by the first component's extremal value,
  // so repeated solves (and different grids) orient the pair identically.
  int ipk = 0;
  for (int j = 1; j < n; ++j)
    if (std::abs(v[j]) > std::abs(v[ipk])) ipk = j;
  if (v[ipk] < 0) v = -v;
  m.yp1 = v.head(n).array();
  m.yp2 = v.tail(n).array();

  Eigen::VectorXd resid = JL * v - m.lambda0 * v;
  m.eigen_residual = resid.norm() / v.norm();

  // Reflection x -> -x on the periodic grid: index i -> (n - i) mod n.
  auto reflect = [n](const Eigen::ArrayXd& f) {
    Eigen::ArrayXd out(n);
    for (int i = 0; i < n; ++i) out[i] = f[(n - i) % n];
    return out;
  };
  m.ym1 = reflect(m.yp1);
  m.ym2 = reflect(m.yp2);

  auto [zp1, zp2] = apply_operator(A, m.yp1, m.yp2);
  auto [zm1, zm2] = apply_operator(A, m.ym1, m.ym2);
  m.zp1 = zp1;
  m.zp2 = zp2;
  m.zm1 = zm1;
  m.zm2 = zm2;

  // With Y- fixed to the plain reflection of Y+, the pairing (Y+, L Y-) has a
  // system-dependent sign; the biorthogonal partners absorb it so that
  // (Y+, Z-) = (Y-, Z+) = +1 after scaling.
  const double d = inner_pair(*A.grid, m.yp1, m.yp2, m.zm1, m.zm2);
  if (d == 0.0)
    throw CertificationError(
        "compute_pw_modes: degenerate pairing (Y+, Z-) = 0");
  const double s = 1.0 / std::sqrt(std::abs(d));
  for (Eigen::ArrayXd* f : {&m.yp1, &m.yp2, &m.ym1, &m.ym2})
    *f *= s;
  const double zsign = d > 0 ? 1.0 : -1.0;
  for (Eigen::ArrayXd* f : {&m.zp1, &m.zp2, &m.zm1, &m.zm2})
    *f *= zsign * s;
  return m;
}

double coercivity_constant(
    const OperatorAssembly& A,
    const std::vector<std::pair<Eigen::ArrayXd, Eigen::ArrayXd>>& constraints,
    QuotientNorm norm) {
  const int n = A.n();
  const int dim = 2 * n;

  Eigen::MatrixXd B;
  if (norm == QuotientNorm::h_space) {
    B = Eigen::MatrixXd::Identity(dim, dim);
    B.topLeftCorner(n, n) += grad_squared_matrix(*A.grid);
    B = 0.5 * (B + B.transpose().eval());
  } else {
    B = Eigen::MatrixXd::Identity(dim, dim);
  }

  if (constraints.empty()) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(A.matrix, B);
    return ges.eigenvalues()[0];
  }

  const int m = static_cast<int>(constraints.size());
  Eigen::MatrixXd C(dim, m);
  for (int j = 0; j < m; ++j) {
    if (constraints[j].first.size() != n || constraints[j].second.size() != n)
      throw ContractError("coercivity_constant: constraint length mismatch");
    C.col(j).head(n) = constraints[j].first.matrix();
    C.col(j).tail(n) = constraints[j].second.matrix();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd N = Q.rightCols(dim - m);  // orthogonal complement basis

  Eigen::MatrixXd An = N.transpose() * A.matrix * N;
  Eigen::MatrixXd Bn = N.transpose() * B * N;
  An = 0.5 * (An + An.transpose().eval());
  Bn = 0.5 * (Bn + Bn.transpose().eval());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(An, Bn);
  if (ges.info() != Eigen::Success)
    throw CertificationError("coercivity_constant: eigensolve failed");
  return ges.eigenvalues()[0];
}

double fit_tail_decay(const Grid& grid, const Eigen::ArrayXd& f) {
  // Fit the decaying flank between 5e-2 and 1e-8 of the peak; outside that
  // window the samples are either core or rounding floor.
  const double peak = f.abs().maxCoeff();
  if (!(peak > 0)) throw ContractError("fit_tail_decay: zero field");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int i = 0; i < grid.n_points(); ++i) {
    const double ax = std::abs(grid.x()[i]);
    const double mag = std::abs(f[i]);
    if (mag > 5e-2 * peak || mag < 1e-8 * peak) continue;
    const double ly = std::log(mag);
    sx += ax;
    sy += ly;
    sxx += ax * ax;
    sxy += ax * ly;
    ++count;
  }
  if (count < 8) throw ContractError("fit_tail_decay: too few tail samples");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -slope;
}

std::string to_text(const SpectrumReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << "p: " << rep.p << "\n"
     << "omega: " << rep.omega << "\n"
     << "n_points: " << rep.n_points << "\n"
     << "n_negative: " << rep.negative_eigenvalues.size() << "\n"
     << "n_zero: " << rep.n_zero_modes << "\n"
     << "kernel_tolerance: " << rep.kernel_tolerance << "\n"
     << "lambda_minus: " << rep.lambda_minus << "\n"
     << "lambda0_formula: " << rep.lambda0_formula << "\n"
     << "lambda0_numeric: " << rep.lambda0_numeric << "\n"
     << "kernel_correlation: " << rep.kernel_correlation << "\n"
     << "gamma0_correlation: " << rep.gamma0_correlation << "\n";
  return os.str();
}

std::string csv_header_spectrum() {
  return "p,omega,n_points,lambda_minus,lambda0_formula,lambda0_numeric,"
         "n_negative,n_zero,kernel_correlation,gamma0_correlation";
}

std::string csv_row_spectrum(const SpectrumReport& rep) {
  std::ostringstream os;
  os.precision(15);
  os << rep.p << ',' << rep.omega << ',' << rep.n_points << ','
     << rep.lambda_minus << ',' << rep.lambda0_formula << ','
     << rep.lambda0_numeric << ',' << rep.negative_eigenvalues.size() << ','
     << rep.n_zero_modes << ',' << rep.kernel_correlation << ','
     << rep.gamma0_correlation;
  return os.str();
}

}  // namespace bqlab
