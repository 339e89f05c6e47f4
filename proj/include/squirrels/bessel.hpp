#pragma once

#include <vector>

namespace squirrels {

/// Largest |x| accepted by the Bessel routines.
inline constexpr double kBesselMaxArgument = 1e4;

/// J_k(x) for integer orders k in [-k_max, k_max] at a fixed argument.
///
/// Negative orders are filled from the reflection J_{-k} = (-1)^k J_k, so the
/// symmetry holds bit-exactly.
class BesselTable {
 public:
  BesselTable(double x, int k_max, std::vector<double> nonnegative_orders);

  double x() const noexcept { return x_; }
  int k_max() const noexcept { return k_max_; }
  double operator()(int k) const;

  /// |J_0^2 + 2 sum_{k>=1} J_k^2 - 1| over the stored orders.
  double normalization_defect() const;

 private:
  double x_;
  int k_max_;
  std::vector<double> values_;  // orders 0..k_max
};

/// Bessel function of the first kind J_k(x), absolute error <= 1e-12.
/// Throws RangeError when |x| > kBesselMaxArgument.
double bessel_j(int k, double x);

/// Batch evaluation J_{-k_max..k_max}(x) from a single downward recurrence.
BesselTable bessel_table(double x, int k_max);

/// Smallest order K such that |J_k(x)| < tol for every k >= K.
int bessel_tail_order(double x, double tol);

/// Smallest positive zero j_{k,1} of J_k, k >= 0, to 1e-8 or better.
double first_positive_zero(int k);

/// All positive zeros of J_k (k >= 0) that are <= x_max, ascending.
std::vector<double> positive_zeros(int k, double x_max);

}  // namespace squirrels
