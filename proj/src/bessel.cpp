#include "squirrels/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "squirrels/errors.hpp"

namespace squirrels {
namespace {

constexpr double kSeriesCutoff = 0.5;
constexpr double kRescaleAbove = 1e200;

void check_argument(double x) {
  if (!std::isfinite(x) || std::abs(x) > kBesselMaxArgument) {
    throw RangeError("bessel argument " + std::to_string(x) +
                     " outside supported range |x| <= 1e4");
  }
}

// Ascending series, used for small arguments where it converges in a few terms.
double series_j(int k, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= k; ++i) term *= half / i;
  if (term == 0.0) return 0.0;
  const double q = -half * half;
  double sum = term;
  for (int m = 1; m < 60; ++m) {
    term *= q / (static_cast<double>(m) * (m + k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// J_0..J_k_max at x >= 0.
std::vector<double> nonnegative_orders(double x, int k_max) {
  std::vector<double> out(static_cast<size_t>(k_max) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (x < kSeriesCutoff) {
    for (int k = 0; k <= k_max; ++k) out[k] = series_j(k, x);
    return out;
  }

  // Miller: start far above both the requested order and the turning point
  // k ~ x, recur downward, normalize with J_0 + 2 sum J_{2m} = 1.
  const int top = std::max(k_max, static_cast<int>(std::ceil(x)));
  int start = top + 32 + static_cast<int>(std::sqrt(60.0 * top));
  if (start % 2 != 0) ++start;

  std::vector<double> work(static_cast<size_t>(start) + 2, 0.0);
  work[start + 1] = 0.0;
  work[start] = 1e-30;
  const double two_over_x = 2.0 / x;
  for (int k = start; k >= 1; --k) {
    work[k - 1] = k * two_over_x * work[k] - work[k + 1];
    if (std::abs(work[k - 1]) > kRescaleAbove) {
      for (int i = k - 1; i <= start; ++i) work[i] /= kRescaleAbove;
    }
  }
  double norm = work[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * work[k];
  for (int k = 0; k <= k_max; ++k) out[k] = work[k] / norm;
  return out;
}

double refine_zero(int k, double lo, double hi) {
  double f_lo = bessel_j(k, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = bessel_j(k, mid);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BesselTable::BesselTable(double x, int k_max, std::vector<double> nonnegative)
    : x_(x), k_max_(k_max), values_(std::move(nonnegative)) {}

double BesselTable::operator()(int k) const {
  const int a = std::abs(k);
  if (a > k_max_) return 0.0;
  const double v = values_[a];
  return (k < 0 && (a % 2 != 0)) ? -v : v;
}

double BesselTable::normalization_defect() const {
  double s = values_[0] * values_[0];
  for (int k = 1; k <= k_max_; ++k) s += 2.0 * values_[k] * values_[k];
  return std::abs(s - 1.0);
}

double bessel_j(int k, double x) {
  check_argument(x);
  const int a = std::abs(k);
  double v = nonnegative_orders(std::abs(x), a)[a];
  // J_{-k}(x) = (-1)^k J_k(x) and J_k(-x) = (-1)^k J_k(x).
  const bool flip = (a % 2 != 0) && ((k < 0) != (x < 0));
  return flip ? -v : v;
}

BesselTable bessel_table(double x, int k_max) {
  check_argument(x);
  if (k_max < 0) throw RangeError("bessel_table: k_max must be >= 0");
  auto values = nonnegative_orders(std::abs(x), k_max);
  if (x < 0) {
    for (int k = 1; k <= k_max; k += 2) values[k] = -values[k];
  }
  return BesselTable(x, k_max, std::move(values));
}

int bessel_tail_order(double x, double tol) {
  check_argument(x);
  const double ax = std::abs(x);
  const int k_max = static_cast<int>(std::ceil(ax)) + 60 +
                    static_cast<int>(std::sqrt(200.0 * (ax + 1.0)));
  const auto values = nonnegative_orders(ax, k_max);
  int k = k_max;
  while (k > 0 && std::abs(values[k - 1]) < tol) --k;
  return k;
}

std::vector<double> positive_zeros(int k, double x_max) {
  if (k < 0) throw RangeError("positive_zeros: order must be >= 0");
  std::vector<double> zeros;
  // j_{k,1} > k, so the scan can start just below k.
  constexpr double step = 0.1;
  double lo = std::max(step, k - 1.0);
  double f_lo = bessel_j(k, lo);
  while (lo < x_max) {
    const double hi = lo + step;
    const double f_hi = bessel_j(k, hi);
    if (f_lo == 0.0) {
      zeros.push_back(lo);
    } else if ((f_lo < 0.0) != (f_hi < 0.0) && f_hi != 0.0) {
      const double z = refine_zero(k, lo, hi);
      if (z <= x_max) zeros.push_back(z);
    }
    lo = hi;
    f_lo = f_hi;
  }
  return zeros;
}

double first_positive_zero(int k) {
  if (k < 0) throw RangeError("first_positive_zero: order must be >= 0");
  constexpr double step = 0.1;
  double lo = std::max(step, k - 1.0);
  double f_lo = bessel_j(k, lo);
  for (;;) {
    const double hi = lo + step;
    const double f_hi = bessel_j(k, hi);
    if ((f_lo < 0.0) != (f_hi < 0.0)) return refine_zero(k, lo, hi);
    lo = hi;
    f_lo = f_hi;
  }
}

}  // namespace squirrels
