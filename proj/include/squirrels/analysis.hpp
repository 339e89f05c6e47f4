#pragma once

#include <vector>

#include "squirrels/grids.hpp"
#include "squirrels/index_function.hpp"
#include "squirrels/states.hpp"

namespace squirrels {

/// Log-spaced grid with `per_decade` points per decade, both ends included.
std::vector<double> log_grid(double lo, double hi, int per_decade);
/// Default epsilon grid: 40 points per decade over [1e-8, sqrt(2 pi)].
std::vector<double> epsilon_grid();
/// Default tau grid: 10 points per decade over [1e-20, 1e-1].
std::vector<double> tau_grid();

/// kappa_eps = ||f restricted to {|m| < eps}|| with f = F1 G rho, integrated
/// exactly over the sublevel intervals of every offset. Non-decreasing in eps.
std::vector<double> measure_kappa(const DensityMatrix& rho, const std::vector<double>& epsilons,
                                  const CouplingConfig& cfg, const Discretization& disc);

/// 1/3 for band-limited, 1/6 for polynomial (sigma = kappa/eps), 2/3 for exponential.
double default_nu(PriorKind kind);

/// sigma_eps = kappa_eps / (sqrt(6 nu) eps). Throws HypothesisError naming the
/// first pair where eps -> kappa_eps eps^{nu - 1} increases.
std::vector<double> sigma_from_kappa(const std::vector<double>& epsilons,
                                     const std::vector<double>& kappa, double nu);

struct PsiFit {
  double exponent = 0.0;    // least-squares slope of log psi vs log tau on the fit window
  double c = 0.0;           // geometric-mean constant against the theoretical shape
  double c_envelope = 0.0;  // smallest constant with psi <= c * shape on the fit window
  double tau_lo = 0.0;
  double tau_hi = 0.0;
};

/// psi(tau) = min_eps [sigma_eps sqrt(tau) + kappa_eps^2] tabulated on a tau grid.
class PsiTable {
 public:
  PsiTable(std::vector<double> epsilons, std::vector<double> kappa, std::vector<double> sigma);

  double operator()(double tau) const;
  /// Minimizing epsilon at tau.
  double argmin(double tau) const;

  const std::vector<double>& taus() const noexcept { return taus_; }
  const std::vector<double>& values() const noexcept { return values_; }
  void tabulate(const std::vector<double>& taus);

  bool monotone(double rel_tol = 1e-12) const;
  /// Midpoint concavity psi((t1 + t2)/2) >= (psi(t1) + psi(t2))/2 on adjacent pairs.
  bool concave(double rel_tol = 1e-12) const;

  /// Fit against the theoretical form of the prior over taus in [tau_lo, tau_hi].
  PsiFit fit(const PriorClass& prior, double tau_lo = 1e-18, double tau_hi = 1e-8) const;

 private:
  std::vector<double> eps_;
  std::vector<double> kappa_;
  std::vector<double> sigma_;
  std::vector<double> taus_;
  std::vector<double> values_;
};

PsiTable build_psi(const std::vector<double>& epsilons, const std::vector<double>& kappa,
                   const std::vector<double>& sigma,
                   const std::vector<double>& taus = tau_grid());

struct VscOptions {
  double nu = 0.0;        // <= 0: default_nu(prior.kind)
  double eps_max = 1e-2;  // index set of the source condition: grid points eps <= eps_max
  std::vector<double> epsilons = epsilon_grid();
  std::vector<double> taus = tau_grid();
};

struct VscCertificate {
  PriorClass prior;
  double nu = 0.0;
  double eps_max = 0.0;
  std::vector<double> epsilons;  // full measurement grid
  std::vector<double> kappa;     // on the full grid
  std::vector<double> sigma;     // on the index set, a prefix of epsilons
  std::vector<double> taus;
  std::vector<double> psi;
  bool kappa_monotone = false;
  double kappa_decay = 0.0;    // kappa at the smallest eps over kappa at the largest
  bool psi_monotone = false;
  bool psi_concave = false;
  double kappa_slope = 0.0;    // log-log slope of kappa over eps in [1e-6, 1e-2]
  PsiFit fit;
};

/// Measures kappa on the full grid, then applies the sigma gate and tabulates
/// psi on the index set eps <= eps_max. Throws HypothesisError from the gate.
VscCertificate vsc_certificate(const DensityMatrix& rho, const PriorClass& prior,
                               const CouplingConfig& cfg, const Discretization& disc,
                               const VscOptions& opts = {});

/// Least-squares slope of log y against log x over points with x in [lo, hi].
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y,
                     double lo = 0.0, double hi = 1e300);

/// Phi(delta) = c sqrt(s(delta^2)) with s the unit-constant index function of
/// the prior, so Phi(t) = 2 sqrt(psi(t^2)) for psi = (c/2)^2 s.
/// Domains: (0, 1] Hölder, (0, 1/2] exponential, (0, exp(-e/2)) polynomial.
class RateFunction {
 public:
  RateFunction(const PriorClass& prior, double c = 1.0);

  double operator()(double delta) const;
  /// log Phi as a function of s = -log delta, valid far below double range.
  double log_rate(double minus_log_delta) const;
  /// Unit-constant shape sqrt(s(delta^2)) on the index-function domain.
  double shape(double delta) const;
  double delta_max() const noexcept { return delta_max_; }
  bool closed_domain() const noexcept { return closed_; }
  IndexFunction psi() const;
  const PriorClass& prior() const noexcept { return prior_; }
  double c() const noexcept { return c_; }

 private:
  PriorClass prior_;
  double c_;
  double delta_max_;
  bool closed_;
};

RateFunction rate_function(const PriorClass& prior, double c = 1.0);

struct SingularSpectrum {
  std::vector<double> largest;   // descending
  std::vector<double> smallest;  // ascending
  std::vector<double> all;       // descending
};

/// Singular values of T as a real-linear map on Hermitian matrices with the
/// Frobenius and quadrature norms. Throws ResourceError when N > 12.
SingularSpectrum singular_spectrum(const CouplingConfig& cfg, const Discretization& disc,
                                   int count);

struct StabilityReport {
  double state_distance = 0.0;  // ||rho1 - rho2||_F
  double data_distance = 0.0;   // ||T rho1 - T rho2||
  double bound = 0.0;           // c sqrt(s(data^2))
  double ratio = 0.0;           // state / bound (0 when both vanish)
  bool in_domain = true;
};

StabilityReport stability_check(const DensityMatrix& rho1, const DensityMatrix& rho2,
                                const PriorClass& prior, const CouplingConfig& cfg,
                                const Discretization& disc, double c = 1.0);

}  // namespace squirrels
