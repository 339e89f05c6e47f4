#include "squirrels/analysis.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "squirrels/errors.hpp"
#include "squirrels/forward.hpp"
#include "squirrels/multiplier.hpp"
#include "squirrels/parallel.hpp"

namespace squirrels {
namespace {

constexpr int kMaxDenseHalfWidth = 12;

bool nondecreasing(const std::vector<double>& v, double rel_tol) {
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] - rel_tol * std::abs(v[i - 1])) return false;
  }
  return true;
}

void require_increasing(const std::vector<double>& eps, const char* who) {
  for (size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InvalidInput(std::string(who) + ": epsilon grid must be positive");
    if (i > 0 && !(eps[i] > eps[i - 1])) {
      throw InvalidInput(std::string(who) + ": epsilon grid must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi > lo) || per_decade < 1) throw InvalidInput("log_grid: invalid range");
  const int n = std::max(1, static_cast<int>(std::lround(per_decade * std::log10(hi / lo))));
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / n);
  out.back() = hi;
  return out;
}

std::vector<double> epsilon_grid() { return log_grid(1e-8, kSqrtTwoPi, 40); }

std::vector<double> tau_grid() { return log_grid(1e-20, 1e-1, 10); }

std::vector<double> measure_kappa(const DensityMatrix& rho, const std::vector<double>& epsilons,
                                  const CouplingConfig& cfg, const Discretization& disc) {
  cfg.validate();
  require_increasing(epsilons, "measure_kappa");
  const int n = disc.n_half();
  if (rho.n_half() != n) throw ConfigError("measure_kappa: state does not match the window");
  const DiagonalStack stack = shift_G(rho.matrix());

  struct Offset {
    int k;
    int n_lo;
    Eigen::VectorXcd coeff;
  };
  std::vector<Offset> offsets;
  for (int k = -2 * n; k <= 2 * n; ++k) {
    const int lo = std::max(-n, -n - k);
    const int hi = std::min(n, n - k);
    Eigen::VectorXcd c(hi - lo + 1);
    for (int m = lo; m <= hi; ++m) c(m - lo) = stack.at(m, k);
    if (c.cwiseAbs().maxCoeff() > 0.0) offsets.push_back({k, lo, std::move(c)});
  }

  std::vector<int> orders;
  for (const auto& o : offsets) orders.push_back(std::abs(o.k));
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  std::vector<std::unique_ptr<SublevelGeometry>> geometry(2 * n + 1);
  parallel_for(static_cast<int>(orders.size()), [&](int i) {
    geometry[orders[i]] = std::make_unique<SublevelGeometry>(cfg, orders[i]);
  });

  const double panel = kPi / (2.0 * n + 2.0);
  auto integrate = [&](const Offset& o, double a, double b) {
    auto density = [&](double phi) {
      Complex s = 0.0;
      for (Eigen::Index j = 0; j < o.coeff.size(); ++j) {
        s += o.coeff(j) * std::polar(1.0, (o.n_lo + static_cast<double>(j)) * phi);
      }
      return std::norm(s) / kTwoPi;
    };
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
    double total = 0.0;
    for (int p = 0; p < pieces; ++p) {
      const double lo = a + (b - a) * p / pieces;
      const double hi = a + (b - a) * (p + 1) / pieces;
      total += boost::math::quadrature::gauss<double, 10>::integrate(density, lo, hi);
    }
    return total;
  };

  std::vector<double> kappa(epsilons.size());
  parallel_for(static_cast<int>(epsilons.size()), [&](int i) {
    double total = 0.0;
    for (const auto& o : offsets) {
      for (const auto& iv : geometry[std::abs(o.k)]->intervals(epsilons[i])) {
        total += integrate(o, iv.lo, iv.hi);
      }
    }
    kappa[i] = std::sqrt(total);
  });
  return kappa;
}

double default_nu(PriorKind kind) {
  switch (kind) {
    case PriorKind::band_limited:
      return 1.0 / 3.0;
    case PriorKind::polynomial:
      return 1.0 / 6.0;
    case PriorKind::exponential:
      return 2.0 / 3.0;
  }
  return 1.0 / 3.0;
}

std::vector<double> sigma_from_kappa(const std::vector<double>& epsilons,
                                     const std::vector<double>& kappa, double nu) {
  if (epsilons.size() != kappa.size()) throw InvalidInput("sigma_from_kappa: table size mismatch");
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidInput("sigma_from_kappa: nu must lie in (0, 1)");
  require_increasing(epsilons, "sigma_from_kappa");
  for (size_t i = 1; i < epsilons.size(); ++i) {
    const double prev = kappa[i - 1] * std::pow(epsilons[i - 1], nu - 1.0);
    const double next = kappa[i] * std::pow(epsilons[i], nu - 1.0);
    if (next > prev * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "kappa_eps * eps^(nu - 1) increases between eps = " << epsilons[i - 1] << " and "
         << epsilons[i] << " (nu = " << nu << ")";
      throw HypothesisError(os.str(), epsilons[i - 1], epsilons[i]);
    }
  }
  std::vector<double> sigma(epsilons.size());
  const double scale = std::sqrt(6.0 * nu);
  for (size_t i = 0; i < epsilons.size(); ++i) sigma[i] = kappa[i] / (scale * epsilons[i]);
  return sigma;
}

PsiTable::PsiTable(std::vector<double> epsilons, std::vector<double> kappa,
                   std::vector<double> sigma)
    : eps_(std::move(epsilons)), kappa_(std::move(kappa)), sigma_(std::move(sigma)) {
  if (eps_.empty() || eps_.size() != kappa_.size() || eps_.size() != sigma_.size()) {
    throw InvalidInput("build_psi: tables must share a non-empty epsilon grid");
  }
}

double PsiTable::operator()(double tau) const {
  if (!(tau >= 0.0)) throw InvalidInput("psi: tau must be nonnegative");
  const double root = std::sqrt(tau);
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < eps_.size(); ++i) {
    best = std::min(best, sigma_[i] * root + kappa_[i] * kappa_[i]);
  }
  return best;
}

double PsiTable::argmin(double tau) const {
  const double root = std::sqrt(tau);
  double best = std::numeric_limits<double>::infinity();
  double at = eps_.front();
  for (size_t i = 0; i < eps_.size(); ++i) {
    const double v = sigma_[i] * root + kappa_[i] * kappa_[i];
    if (v < best) {
      best = v;
      at = eps_[i];
    }
  }
  return at;
}

void PsiTable::tabulate(const std::vector<double>& taus) {
  taus_ = taus;
  values_.resize(taus.size());
  for (size_t i = 0; i < taus.size(); ++i) values_[i] = (*this)(taus[i]);
}

bool PsiTable::monotone(double rel_tol) const { return nondecreasing(values_, rel_tol); }

bool PsiTable::concave(double rel_tol) const {
  for (size_t i = 1; i < taus_.size(); ++i) {
    const double mid = (*this)(0.5 * (taus_[i - 1] + taus_[i]));
    const double chord = 0.5 * (values_[i - 1] + values_[i]);
    if (mid < chord - rel_tol * std::abs(chord)) return false;
  }
  return true;
}

PsiFit PsiTable::fit(const PriorClass& prior, double tau_lo, double tau_hi) const {
  PsiFit out;
  out.tau_lo = tau_lo;
  out.tau_hi = tau_hi;
  out.exponent = log_log_slope(taus_, values_, tau_lo, tau_hi);
  const IndexFunction shape = IndexFunction::for_prior(prior, 1.0);
  double log_sum = 0.0;
  int count = 0;
  for (size_t i = 0; i < taus_.size(); ++i) {
    const double t = taus_[i];
    if (t < tau_lo || t > tau_hi || !(t < shape.tau_max())) continue;
    const double ratio = values_[i] / shape(t);
    log_sum += std::log(ratio);
    out.c_envelope = std::max(out.c_envelope, ratio);
    ++count;
  }
  out.c = count > 0 ? std::exp(log_sum / count) : 0.0;
  return out;
}

PsiTable build_psi(const std::vector<double>& epsilons, const std::vector<double>& kappa,
                   const std::vector<double>& sigma, const std::vector<double>& taus) {
  PsiTable table(epsilons, kappa, sigma);
  table.tabulate(taus);
  return table;
}

VscCertificate vsc_certificate(const DensityMatrix& rho, const PriorClass& prior,
                               const CouplingConfig& cfg, const Discretization& disc,
                               const VscOptions& opts) {
  prior.validate();
  VscCertificate cert;
  cert.prior = prior;
  cert.nu = opts.nu > 0.0 ? opts.nu : default_nu(prior.kind);
  cert.eps_max = opts.eps_max;
  cert.epsilons = opts.epsilons;
  cert.kappa = measure_kappa(rho, cert.epsilons, cfg, disc);
  cert.kappa_monotone = nondecreasing(cert.kappa, 1e-12);
  cert.kappa_decay = cert.kappa.front() / cert.kappa.back();
  cert.kappa_slope = log_log_slope(cert.epsilons, cert.kappa, 1e-6, 1e-2);

  const auto end = std::upper_bound(cert.epsilons.begin(), cert.epsilons.end(), opts.eps_max);
  const std::vector<double> index_eps(cert.epsilons.begin(), end);
  const std::vector<double> index_kappa(cert.kappa.begin(), cert.kappa.begin() + index_eps.size());
  if (index_eps.size() < 2) throw InvalidInput("vsc_certificate: index set has fewer than two points");
  cert.sigma = sigma_from_kappa(index_eps, index_kappa, cert.nu);
  const PsiTable table = build_psi(index_eps, index_kappa, cert.sigma, opts.taus);
  cert.taus = table.taus();
  cert.psi = table.values();
  cert.psi_monotone = table.monotone();
  cert.psi_concave = table.concave();
  cert.fit = table.fit(prior);
  return cert;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y, double lo,
                     double hi) {
  if (x.size() != y.size()) throw InvalidInput("log_log_slope: size mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi || !(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw InvalidInput("log_log_slope: fewer than two usable points");
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw InvalidInput("log_log_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

RateFunction::RateFunction(const PriorClass& prior, double c) : prior_(prior), c_(c) {
  prior_.validate();
  if (!(c > 0.0)) throw InvalidInput("rate function constant must be positive");
  switch (prior.kind) {
    case PriorKind::band_limited:
      delta_max_ = 1.0;
      closed_ = true;
      break;
    case PriorKind::exponential:
      delta_max_ = 0.5;
      closed_ = true;
      break;
    case PriorKind::polynomial:
      delta_max_ = std::exp(-0.5 * std::numbers::e);
      closed_ = false;
      break;
  }
}

double RateFunction::log_rate(double s) const {
  double log_shape = 0.0;
  switch (prior_.kind) {
    case PriorKind::band_limited:
      log_shape = -s / (1.0 + 2.0 * prior_.k0);
      break;
    case PriorKind::exponential:
      if (!(s > 0.0)) throw DomainError("exponential rate needs delta < 1");
      log_shape = -std::sqrt(-std::log(prior_.b) * s);
      break;
    case PriorKind::polynomial: {
      const double l = 2.0 * s;
      if (!(l > std::numbers::e)) throw DomainError("polynomial rate needs -log delta > e/2");
      log_shape = -2.0 * prior_.mu * (std::log(l) - std::log(std::log(l)));
      break;
    }
  }
  return std::log(c_) + log_shape;
}

double RateFunction::shape(double delta) const {
  if (!(delta > 0.0)) throw DomainError("rate function needs delta > 0");
  return std::exp(log_rate(-std::log(delta)) - std::log(c_));
}

double RateFunction::operator()(double delta) const {
  const bool inside = delta > 0.0 && (closed_ ? delta <= delta_max_ : delta < delta_max_);
  if (!inside) {
    std::ostringstream os;
    os << to_string(prior_.kind) << " rate function evaluated outside (0, " << delta_max_
       << (closed_ ? "]" : ")") << ": delta = " << delta;
    throw DomainError(os.str());
  }
  return c_ * shape(delta);
}

IndexFunction RateFunction::psi() const {
  return IndexFunction::for_prior(prior_, 0.25 * c_ * c_);
}

RateFunction rate_function(const PriorClass& prior, double c) { return RateFunction(prior, c); }

SingularSpectrum singular_spectrum(const CouplingConfig& cfg, const Discretization& disc,
                                   int count) {
  const int n = disc.n_half();
  if (n > kMaxDenseHalfWidth) {
    throw ResourceError("dense assembly limited to N <= " + std::to_string(kMaxDenseHalfWidth));
  }
  if (count < 1) throw InvalidInput("singular_spectrum: count must be >= 1");
  const ForwardOperator op(cfg, disc);
  const int d = disc.dim();
  const Eigen::Index rows = static_cast<Eigen::Index>(disc.out_dim()) * disc.m_theta();
  const double root_w = std::sqrt(disc.theta_weight());
  RealMatrix a(rows, static_cast<Eigen::Index>(d) * d);
  const double h = 1.0 / std::sqrt(2.0);
  Eigen::Index col = 0;
  auto push = [&](const ComplexMatrix& basis) {
    const Spectrogram y = op.apply(basis);
    a.col(col++) = root_w * Eigen::Map<const Eigen::VectorXd>(y.p.data(), rows);
  };
  for (int j = 0; j < d; ++j) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(j, j) = 1.0;
    push(e);
    for (int k = j + 1; k < d; ++k) {
      ComplexMatrix s = ComplexMatrix::Zero(d, d);
      s(j, k) = h;
      s(k, j) = h;
      push(s);
      ComplexMatrix t = ComplexMatrix::Zero(d, d);
      t(j, k) = Complex(0.0, h);
      t(k, j) = Complex(0.0, -h);
      push(t);
    }
  }
  const Eigen::VectorXd sv = Eigen::BDCSVD<RealMatrix>(a).singularValues();
  SingularSpectrum out;
  out.all.assign(sv.data(), sv.data() + sv.size());
  const int m = std::min<int>(count, static_cast<int>(sv.size()));
  out.largest.assign(out.all.begin(), out.all.begin() + m);
  out.smallest.assign(out.all.rbegin(), out.all.rbegin() + m);
  return out;
}

StabilityReport stability_check(const DensityMatrix& rho1, const DensityMatrix& rho2,
                                const PriorClass& prior, const CouplingConfig& cfg,
                                const Discretization& disc, double c) {
  if (rho1.n_half() != disc.n_half() || rho2.n_half() != disc.n_half()) {
    throw ConfigError("stability_check: states do not match the window");
  }
  StabilityReport rep;
  const ComplexMatrix diff = rho1.matrix() - rho2.matrix();
  rep.state_distance = diff.norm();
  rep.data_distance = norm(ForwardOperator(cfg, disc).apply(diff));
  if (rep.state_distance == 0.0 && rep.data_distance == 0.0) return rep;
  try {
    rep.bound = c * RateFunction(prior, 1.0).shape(rep.data_distance);
    rep.ratio = rep.state_distance / rep.bound;
  } catch (const DomainError&) {
    rep.in_domain = false;
    rep.ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace squirrels
