#pragma once

#include <vector>

#include "squirrels/grids.hpp"

namespace squirrels {

/// m(phi, k) = sqrt(2 pi) i^k exp(i phi k / 2) J_k(4 |g| sin(phi / 2)).
Complex m_closed_form(double phi, int k, const CouplingConfig& cfg);

/// sqrt(2 pi) sum_n exp(i phi n) J_{n-k}(2|g|) J_n(2|g|), summed over
/// |n| <= truncation. truncation < 0 selects the Bessel tail rule (|J| < 1e-14).
Complex m_fourier_series(double phi, int k, const CouplingConfig& cfg, int truncation = -1);

/// Multiplier sampled on the (phi, k) grid of a discretization, offsets |k| <= 2N.
class Multiplier {
 public:
  Multiplier(const CouplingConfig& cfg, const Discretization& disc);

  const CouplingConfig& coupling() const noexcept { return cfg_; }
  int n_half() const noexcept { return n_half_; }
  int k_cutoff() const noexcept { return 2 * n_half_; }
  const ComplexMatrix& samples() const noexcept { return m_; }
  Complex at(int j, int k) const { return m_(j, k + 2 * n_half_); }
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

  DiagonalSpectrum apply(const DiagonalSpectrum& f) const;
  DiagonalSpectrum apply_adjoint(const DiagonalSpectrum& f) const;

 private:
  CouplingConfig cfg_;
  int n_half_;
  ComplexMatrix m_;  // M_phi x (4N + 1)
};

/// P_eps f: zero every sample where |m| < eps.
DiagonalSpectrum spectral_projection(const DiagonalSpectrum& f, double epsilon,
                                     const Multiplier& m);

struct PhiInterval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double phi) const { return lo <= phi && phi <= hi; }
};

/// Sublevel sets I_{k,eps} = {phi in [-pi, pi] : |m(phi, k)| < eps} for one
/// offset. |m(., k)| is sampled once on a uniform grid augmented with the exact
/// zero set; interval endpoints are refined by bisection to near machine
/// precision. Immutable after construction.
class SublevelGeometry {
 public:
  static constexpr int kMinResolution = 100000;

  SublevelGeometry(const CouplingConfig& cfg, int k, int resolution = kMinResolution);

  int k() const noexcept { return k_; }
  double abs_m(double phi) const;

  std::vector<PhiInterval> intervals(double epsilon) const;
  double measure(double epsilon) const;
  /// Length of the component containing phi = 0 (0 when |m(0, k)| >= eps).
  double central_component(double epsilon) const;

 private:
  double crossing(double inside, double outside, double epsilon) const;

  CouplingConfig cfg_;
  int k_;
  std::vector<double> phi_;
  std::vector<double> abs_m_;
};

/// |I_{k,eps}| with the given sampling resolution (>= 1e5).
double sublevel_measure(double epsilon, int k, const CouplingConfig& cfg,
                        int resolution = SublevelGeometry::kMinResolution);

struct SublevelReport {
  double epsilon = 0.0;
  std::vector<int> ks;
  std::vector<double> measures;          // |I_{k,eps}|
  std::vector<double> central;           // component containing 0
  std::vector<std::vector<PhiInterval>> components;
  double total = 0.0;                    // sum over k of |I_{k,eps}|
};

/// Sublevel report over offsets -k_max..k_max.
SublevelReport sublevel_report(double epsilon, int k_max, const CouplingConfig& cfg,
                               int resolution = SublevelGeometry::kMinResolution);

struct ZeroInventory {
  int k = 0;
  std::vector<double> zeros;  // zeros of m(., k) in [-pi, pi], ascending
  int zero_free_order = 0;    // K(g): smallest k >= 0 with j_{k,1} > 4|g|
};

/// Zeros of m(., k) from the Bessel zeros j_{k,i} <= 4|g|, plus phi = 0 for k != 0.
/// Throws RangeError when |k| > 64.
ZeroInventory zero_inventory(int k, const CouplingConfig& cfg);

/// K(g) = min{k >= 0 : j_{k,1} > 4|g|}.
int zero_free_order(const CouplingConfig& cfg);

}  // namespace squirrels
