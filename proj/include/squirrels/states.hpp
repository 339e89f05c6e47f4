#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "squirrels/grids.hpp"

namespace squirrels {

/// Hermitian, positive semidefinite, trace-one matrix on the index window
/// [-N, N]. Instances always satisfy the invariants (checked at construction).
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-14;
  static constexpr double kEigenTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;

  /// Validates and wraps m; throws InvalidInput if an invariant fails.
  static DensityMatrix from_matrix(ComplexMatrix m);

  int n_half() const noexcept { return static_cast<int>(rho_.rows() / 2); }
  int dim() const noexcept { return static_cast<int>(rho_.rows()); }
  const ComplexMatrix& matrix() const noexcept { return rho_; }
  Complex at(int j, int k) const { return rho_(j + n_half(), k + n_half()); }

  /// Maximally mixed state I / (2N + 1).
  static DensityMatrix maximally_mixed(int n_half);

 private:
  explicit DensityMatrix(ComplexMatrix m) : rho_(std::move(m)) {}
  ComplexMatrix rho_;
};

struct DensityDefects {
  double hermitian = 0.0;       // max |m_jk - conj(m_kj)|
  double min_eigenvalue = 0.0;
  double trace_error = 0.0;     // |tr m - 1|
  double trace_imag = 0.0;
};

DensityDefects measure_defects(const ComplexMatrix& m);

enum class PriorKind { band_limited, polynomial, exponential };

/// A-priori information on the off-diagonal decay of the true state.
struct PriorClass {
  PriorKind kind = PriorKind::band_limited;
  int k0 = 1;          // band_limited
  double mu = 0.0;     // polynomial
  double b = 0.0;      // exponential
  double c_rho = 1.0;  // polynomial / exponential

  static PriorClass band_limited(int k0);
  static PriorClass polynomial(double mu, double c_rho = 1.0);
  static PriorClass exponential(double b, double c_rho = 1.0);

  /// Throws InvalidInput when the parameters of the active kind are invalid.
  void validate() const;

  /// Envelope bound on sum_n |rho_{n+k,n}| at offset k != 0.
  double envelope(int k) const;

  /// Whether rho satisfies the class bound on every offset in its window.
  bool admits(const ComplexMatrix& rho, double tol = 1e-12) const;
};

const char* to_string(PriorKind kind);

/// S_k = sum_n |rho_{n+k,n}| for k = 0..2N.
std::vector<double> diagonal_abs_sums(const ComplexMatrix& rho);

/// Euclidean projection of v onto the probability simplex (sort-and-threshold).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Frobenius-nearest density matrix to the Hermitian matrix h.
/// Inputs with Hermitian defect <= 1e-10 are symmetrized; larger defects throw
/// InvalidInput.
DensityMatrix project_to_constraint(const ComplexMatrix& h);

/// Random density matrix with rho_{n+k,n} = 0 exactly for |k| > k0.
/// Throws InvalidInput unless 0 <= k0 <= 2N.
DensityMatrix make_band_limited(int n_half, int k0, std::uint64_t seed);

/// Random density matrix with a controlled off-diagonal decay. For the
/// polynomial kind `param` is mu, for the exponential kind it is b. The returned
/// PriorClass carries the measured constant C_rho.
std::pair<DensityMatrix, PriorClass> make_decaying(int n_half, PriorKind kind,
                                                   double param, std::uint64_t seed);

/// U(theta0)|e_0><e_0|U(theta0)^* truncated to the window and renormalized.
DensityMatrix make_pinem_state(int n_half, Complex g, double theta0);

/// Generic random density matrix of the given rank (rank <= 0: full rank).
DensityMatrix make_random_density(int n_half, std::uint64_t seed, int rank = 0);

}  // namespace squirrels
