#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

namespace squirrels {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline const double kSqrtTwoPi = std::sqrt(kTwoPi);

/// Laser coupling strength |g_omega|. Any phase of g_omega is absorbed into theta.
struct CouplingConfig {
  double g_abs = 1.0;

  /// Throws ConfigError unless 0 < g_abs <= 10.
  void validate() const;
};

/// Truncation of the state window, output window and the two angle grids.
///
/// State indices n lie in [-N, N]; spectrogram rows l lie in [-(N+B), N+B];
/// diagonal offsets k lie in [-2N, 2N]. Angle grids are uniform with the left
/// endpoint -pi included and the right endpoint excluded. Immutable after
/// construction; copies share the precomputed transform tables.
class Discretization {
 public:
  struct Options {
    double tail_tol = 1e-13;
    int buffer = -1;   // < 0: Bessel tail rule at argument 4|g|
    int m_theta = 0;   // 0: next power of two >= 4N + 4
    int m_phi = 0;     // 0: exactly the output window width 2(N+B)+1
  };

  Discretization(int n_half, const CouplingConfig& cfg);
  Discretization(int n_half, const CouplingConfig& cfg, const Options& opts);

  int n_half() const noexcept { return n_half_; }
  int buffer() const noexcept { return buffer_; }
  int m_theta() const noexcept { return m_theta_; }
  int m_phi() const noexcept { return m_phi_; }
  double tail_tol() const noexcept { return tail_tol_; }

  int dim() const noexcept { return 2 * n_half_ + 1; }
  int offsets() const noexcept { return 4 * n_half_ + 1; }
  int out_half() const noexcept { return n_half_ + buffer_; }
  int out_dim() const noexcept { return 2 * out_half() + 1; }

  double theta(int j) const noexcept { return -kPi + kTwoPi * j / m_theta_; }
  double phi(int j) const noexcept { return -kPi + kTwoPi * j / m_phi_; }
  double theta_weight() const noexcept { return kTwoPi / m_theta_; }
  double phi_weight() const noexcept { return kTwoPi / m_phi_; }

  /// Buffer the tail rule requires for coupling g at tolerance tol.
  static int required_buffer(double g_abs, double tol);

  // Transform tables (see grids.cpp for the exact scaling).
  const ComplexMatrix& synthesis_n() const { return tables_->e1; }
  const ComplexMatrix& analysis_l() const { return tables_->wl; }
  const ComplexMatrix& synthesis_theta() const { return tables_->vt; }

 private:
  struct Tables {
    ComplexMatrix e1;  // M_phi x dim:      exp(i n phi_j) / sqrt(2 pi)
    ComplexMatrix wl;  // out_dim x M_phi:  exp(-i l phi_j) / M_phi
    ComplexMatrix vt;  // offsets x M_theta: exp(-i k theta_j)
  };

  int n_half_;
  int buffer_;
  int m_theta_;
  int m_phi_;
  double tail_tol_;
  std::shared_ptr<const Tables> tables_;
};

/// Diagonals of a window matrix: column k + 2N holds d_k(n) = rho_{n+k,n}
/// at row n + N, zero where n + k leaves the window.
struct DiagonalStack {
  int n_half = 0;
  ComplexMatrix d;

  Complex at(int n, int k) const { return d(n + n_half, k + 2 * n_half); }
  static bool valid(int n_half, int n, int k) {
    return n + k >= -n_half && n + k <= n_half;
  }
};

/// Samples f(phi_j, k) on the phi grid; row j, column k + 2N.
struct DiagonalSpectrum {
  int n_half = 0;
  ComplexMatrix f;

  Complex at(int j, int k) const { return f(j, k + 2 * n_half); }
  double weight() const { return kTwoPi / static_cast<double>(f.rows()); }
};

/// Complex-valued (l, theta) field, the image of fourier_12 before the real
/// part is taken. Row l + N + B, column theta index.
struct SpectrogramField {
  int n_half = 0;
  int buffer = 0;
  ComplexMatrix y;
  double weight() const { return kTwoPi / static_cast<double>(y.cols()); }
};

/// Real spectrogram p(l, theta_j): row l + N + B, column j.
struct Spectrogram {
  int n_half = 0;
  int buffer = 0;
  RealMatrix p;

  int out_half() const { return n_half + buffer; }
  int m_theta() const { return static_cast<int>(p.cols()); }
  double weight() const { return kTwoPi / static_cast<double>(p.cols()); }
  double at(int l, int j) const { return p(l + out_half(), j); }
};

// Inner products. Matrices: trace (Frobenius); angle grids: quadrature 2 pi / M.
Complex inner(const ComplexMatrix& a, const ComplexMatrix& b);
Complex inner(const DiagonalStack& a, const DiagonalStack& b);
Complex inner(const DiagonalSpectrum& a, const DiagonalSpectrum& b);
Complex inner(const SpectrogramField& a, const SpectrogramField& b);
double inner(const Spectrogram& a, const Spectrogram& b);
double norm(const DiagonalSpectrum& f);
double norm(const SpectrogramField& y);
double norm(const Spectrogram& y);

/// (G rho)_{n,k} = rho_{n+k,n}.
DiagonalStack shift_G(const ComplexMatrix& rho);
/// Inverse re-indexing; entries outside the valid support are discarded.
ComplexMatrix shift_G_adjoint(const DiagonalStack& stack);

/// f(phi_j, k) = (1/sqrt(2 pi)) sum_n exp(i n phi_j) d_k(n).
DiagonalSpectrum fourier_1(const DiagonalStack& stack, const Discretization& disc);
DiagonalStack fourier_1_adjoint(const DiagonalSpectrum& f, const Discretization& disc);

/// y(l, theta) = (1/2 pi) sum_k exp(-i k theta) int exp(-i l phi) h(phi, k) dphi,
/// the phi integral taken by the grid quadrature.
SpectrogramField fourier_12(const DiagonalSpectrum& h, const Discretization& disc);
DiagonalSpectrum fourier_12_adjoint(const SpectrogramField& y, const Discretization& disc);

/// Zero-valued containers shaped for disc.
DiagonalStack zero_stack(const Discretization& disc);
DiagonalSpectrum zero_spectrum(const Discretization& disc);
Spectrogram zero_spectrogram(const Discretization& disc);

/// Real spectrogram widened to a complex field.
SpectrogramField to_field(const Spectrogram& y);

}  // namespace squirrels
