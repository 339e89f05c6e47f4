#pragma once

#include <vector>

#include "squirrels/grids.hpp"
#include "squirrels/multiplier.hpp"
#include "squirrels/states.hpp"

namespace squirrels {

/// (U)_{k,l} = exp(i (k - l) theta) J_{k-l}(2|g|) for output rows |k| <= row_half
/// and input columns |l| <= col_half.
ComplexMatrix u_omega_matrix(double theta, const CouplingConfig& cfg, int row_half,
                             int col_half);

/// Spectrogram as the diagonal of U(theta_j) rho U(theta_j)^*, one theta at a time.
/// Cost O(M_theta (N+B) N^2); meant as a reference implementation.
Spectrogram apply_direct(const ComplexMatrix& rho, const CouplingConfig& cfg,
                         const Discretization& disc);
Spectrogram apply_direct(const DensityMatrix& rho, const CouplingConfig& cfg,
                         const Discretization& disc);

/// Forward map composed from shift_G, fourier_1, the multiplier and fourier_12,
/// together with its exact discrete adjoint. Immutable; safe to share.
class ForwardOperator {
 public:
  ForwardOperator(const CouplingConfig& cfg, const Discretization& disc);

  const CouplingConfig& coupling() const noexcept { return cfg_; }
  const Discretization& disc() const noexcept { return disc_; }
  const Multiplier& multiplier() const noexcept { return m_; }

  /// T rho for a Hermitian rho. Throws InvalidInput if the image is not real.
  Spectrogram apply(const ComplexMatrix& rho) const;
  /// Complex image of an arbitrary window matrix.
  SpectrogramField apply_field(const ComplexMatrix& x) const;
  /// T^* y, Hermitian.
  ComplexMatrix adjoint(const Spectrogram& y) const;

 private:
  CouplingConfig cfg_;
  Discretization disc_;
  Multiplier m_;
};

Spectrogram apply_factorized(const ComplexMatrix& rho, const CouplingConfig& cfg,
                             const Discretization& disc);
Spectrogram apply_factorized(const DensityMatrix& rho, const CouplingConfig& cfg,
                             const Discretization& disc);

/// T^* y under the quadrature inner product on spectrograms and the trace
/// inner product on matrices; output Hermitian-symmetrized.
ComplexMatrix apply_adjoint(const Spectrogram& y, const CouplingConfig& cfg,
                            const Discretization& disc);

/// T^* T assembled per diagonal offset: T^*T acts on the k-th diagonal d_k by
/// the Hermitian block Q_k = 2 pi R_k^* R_k with R_k = W diag(m_k) E, restricted
/// to the valid rows of that diagonal.
class NormalOperator {
 public:
  explicit NormalOperator(const ForwardOperator& op);

  int n_half() const noexcept { return n_half_; }
  ComplexMatrix apply(const ComplexMatrix& rho) const;
  /// Largest eigenvalue of T^*T, i.e. ||T||^2, from the blocks.
  double top_eigenvalue() const;
  const ComplexMatrix& block(int k) const { return blocks_[k + 2 * n_half_]; }

 private:
  int n_half_;
  std::vector<ComplexMatrix> blocks_;  // restricted to valid rows/cols, offset k + 2N
};

/// ||T|| by power iteration on T^*T until the relative change of the Rayleigh
/// quotient drops below 1e-6. Throws ConvergenceError after max_iter iterations.
double operator_norm_estimate(const ForwardOperator& op, int max_iter = 500);
double operator_norm_estimate(const CouplingConfig& cfg, const Discretization& disc);

}  // namespace squirrels
