#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bqlab/grid.hpp"
#include "bqlab/soliton.hpp"

namespace bqlab {

/// Discrete second variation of the action at the speed-omega ground state:
/// blocks [[-dxx + 1 - (2p+1)|Phi_w|^2p, w],[w, 1]] on the grid, realized as a
/// symmetric (2n x 2n) matrix acting pointwise (L2 inner product = spacing *
/// Euclidean, so symmetry carries over).
struct OperatorAssembly {
  GridPtr grid;
  double p = 1;
  double omega = 0;
  Eigen::MatrixXd matrix;

  int n() const { return grid->n_points(); }
};

OperatorAssembly assemble_linearized(double p, double omega, GridPtr grid);

/// Same blocks with the potential removed (constant-coefficient part).
OperatorAssembly assemble_constant_coefficient(double omega, GridPtr grid);

/// Scalar operator -dxx + (1 - w^2) - (2p+1) Phi_w^2p as an n x n matrix.
Eigen::MatrixXd scalar_operator(double p, double omega, const Grid& grid);

/// spacing * w^T M w for a pair w = (w1, w2).
double quadratic_form(const OperatorAssembly& A, const Eigen::ArrayXd& w1,
                      const Eigen::ArrayXd& w2);

/// Apply the assembled operator to a pair without forming products by hand.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> apply_operator(
    const OperatorAssembly& A, const Eigen::ArrayXd& w1,
    const Eigen::ArrayXd& w2);

struct SpectrumReport {
  std::vector<double> negative_eigenvalues;  // sorted ascending
  int n_zero_modes = 0;
  double kernel_tolerance = 0;
  double lambda_minus = 0;    // ground eigenvalue of the scalar operator
  double lambda0_formula = 0; // closed form from lambda_minus
  double lambda0_numeric = 0; // smallest eigenvalue of the full operator
  double kernel_correlation = 0;  // |<zero mode, d_x Phi pair>| (normalized)
  double gamma0_correlation = 0;  // negative direction vs (psi0, w psi0/(l0-1))
  double p = 0, omega = 0;
  int n_points = 0;
};

/// Full symmetric eigensolve with certification: exactly one negative
/// eigenvalue and a one-dimensional kernel aligned with the translation mode.
/// Throws CertificationError when the counts disagree.
SpectrumReport certify_spectrum(const OperatorAssembly& A);

/// The unstable pair of the symplectic linearization J*L, J = [[0,dx],[dx,0]]:
/// J L Y+ = +lambda0 Y+, Y-(x) = Y+(-x), Z+- = L Y+-, normalized so that
/// (Y+,Z-) = (Y-,Z+) = 1 in L2 x L2. The Y+ component grows like
/// exp(+lambda0 t) under the forward linearized flow, Y- under the backward.
struct PegoWeinsteinModes {
  double lambda0 = 0;
  double p = 0, omega = 0;
  GridPtr grid;
  Eigen::ArrayXd yp1, yp2, ym1, ym2;  // Y+ and Y- components
  Eigen::ArrayXd zp1, zp2, zm1, zm2;  // Z+ and Z- components
  double eigen_residual = 0;          // |J L Y+ - l0 Y+| / |Y+|
};

/// Dense nonsymmetric eigensolve of J*L filtered to real, positive, isolated
/// eigenvalues with decaying eigenvectors. Empty when no such mode exists.
std::optional<PegoWeinsteinModes> compute_pw_modes(const OperatorAssembly& A);

enum class QuotientNorm { h_space, l2_pair };

/// Minimum of <L w, w> / |w|^2 over the L2-orthogonal complement of the given
/// constraint pairs; the norm in the denominator is selectable (the plain L2
/// quotient reproduces eigenvalues, the H quotient gives coercivity constants).
double coercivity_constant(
    const OperatorAssembly& A,
    const std::vector<std::pair<Eigen::ArrayXd, Eigen::ArrayXd>>& constraints,
    QuotientNorm norm);

/// Log-linear fit of log|f| against |x| over 0.3L <= |x| <= 0.75L; returns the
/// decay rate (positive for decaying profiles).
double fit_tail_decay(const Grid& grid, const Eigen::ArrayXd& f);

std::string to_text(const SpectrumReport& rep);
std::string csv_header_spectrum();
std::string csv_row_spectrum(const SpectrumReport& rep);

}  // namespace bqlab
