#pragma once

#include <Eigen/Core>
#include <memory>

namespace bqlab {

/// Periodic equispaced grid on [-L, L) with DFT wavenumbers k_m = pi*m/L.
class Grid {
 public:
  static Grid make(double half_length, int n_points);

  double half_length() const { return half_length_; }
  int n_points() const { return n_; }
  double spacing() const { return spacing_; }

  /// Node positions x_i = -L + i*h.
  const Eigen::ArrayXd& x() const { return x_; }

  /// Wavenumbers in standard DFT order: m = 0,1,...,n/2-1,-n/2,...,-1.
  const Eigen::ArrayXd& wavenumbers() const { return k_; }

  /// Wavenumbers of the half (real-transform) spectrum, m = 0..n/2.
  const Eigen::ArrayXd& wavenumbers_half() const { return k_half_; }

  bool operator==(const Grid& other) const {
    return n_ == other.n_ && half_length_ == other.half_length_;
  }

 private:
  Grid() = default;
  double half_length_ = 0, spacing_ = 0;
  int n_ = 0;
  Eigen::ArrayXd x_, k_, k_half_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(double half_length, int n_points);

/// A (u1, u2) pair sampled on a grid at a fixed time; lives in the
/// discrete H^1 x L^2 energy space.
struct FieldState {
  GridPtr grid;
  Eigen::ArrayXd u1, u2;
  double time = 0.0;

  static FieldState zero(GridPtr g, double t = 0.0);
  bool finite() const;
};

/// Real half-spectrum transforms; irfft(rfft(f)) reproduces f.
Eigen::ArrayXcd rfft(const Grid& g, const Eigen::ArrayXd& f);
Eigen::ArrayXd irfft(const Grid& g, const Eigen::ArrayXcd& spec);

/// DFT-based d^order/dx^order; order in {1,2,3,4}. Exact for trigonometric
/// polynomials resolvable on the grid; odd orders zero the Nyquist mode.
Eigen::ArrayXd spectral_derivative(const Grid& g, const Eigen::ArrayXd& f,
                                   int order);

/// Rectangle rule h * sum(f); spectrally accurate for smooth periodic f.
double quadrature(const Grid& g, const Eigen::ArrayXd& f);

/// L2 inner products under the same rule.
double inner_l2(const Grid& g, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b);
double inner_pair(const Grid& g, const Eigen::ArrayXd& a1,
                  const Eigen::ArrayXd& a2, const Eigen::ArrayXd& b1,
                  const Eigen::ArrayXd& b2);

/// sqrt(|u1|_L2^2 + |dx u1|_L2^2 + |u2|_L2^2).
double h_norm(const FieldState& state);
double h_norm_pair(const Grid& g, const Eigen::ArrayXd& u1,
                   const Eigen::ArrayXd& u2);

/// f(x - shift) by Fourier phase shift (spectrally accurate).
Eigen::ArrayXd translate(const Grid& g, const Eigen::ArrayXd& f, double shift);

/// Evaluate the trigonometric interpolant of f (given on `from`) at the
/// nodes of `to`; zero outside [-L_from, L_from). Used to carry numerically
/// computed profiles between grids of different extent.
Eigen::ArrayXd resample(const Grid& from, const Eigen::ArrayXd& f,
                        const Grid& to);

/// Dense spectral differentiation matrix (circulant), same convention as
/// spectral_derivative.
Eigen::MatrixXd derivative_matrix(const Grid& g, int order);

}  // namespace bqlab
