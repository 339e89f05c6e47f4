#include "squirrels/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "squirrels/bessel.hpp"
#include "squirrels/errors.hpp"

namespace squirrels {
namespace {

// i^k for integer k, exact.
Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return {0.0, 1.0};
    case 2:
      return {-1.0, 0.0};
    default:
      return {0.0, -1.0};
  }
}

Complex m_from_bessel(double phi, int k, double jk) {
  return kSqrtTwoPi * i_power(k) * std::polar(1.0, 0.5 * phi * k) * jk;
}

}  // namespace

Complex m_closed_form(double phi, int k, const CouplingConfig& cfg) {
  return m_from_bessel(phi, k, bessel_j(k, 4.0 * cfg.g_abs * std::sin(0.5 * phi)));
}

Complex m_fourier_series(double phi, int k, const CouplingConfig& cfg, int truncation) {
  const double x = 2.0 * cfg.g_abs;
  const int K = truncation >= 0 ? truncation : bessel_tail_order(x, 1e-14);
  const auto table = bessel_table(x, K + std::abs(k));
  Complex sum = 0.0;
  for (int n = -K; n <= K; ++n) {
    sum += std::polar(1.0, phi * n) * (table(n - k) * table(n));
  }
  return kSqrtTwoPi * sum;
}

Multiplier::Multiplier(const CouplingConfig& cfg, const Discretization& disc)
    : cfg_(cfg), n_half_(disc.n_half()) {
  cfg.validate();
  const int k_max = 2 * n_half_;
  m_.resize(disc.m_phi(), disc.offsets());
  for (int j = 0; j < disc.m_phi(); ++j) {
    const double phi = disc.phi(j);
    const auto table = bessel_table(4.0 * cfg.g_abs * std::sin(0.5 * phi), k_max);
    for (int k = -k_max; k <= k_max; ++k) {
      m_(j, k + k_max) = m_from_bessel(phi, k, table(k));
    }
  }
}

DiagonalSpectrum Multiplier::apply(const DiagonalSpectrum& f) const {
  if (f.f.rows() != m_.rows() || f.f.cols() != m_.cols()) {
    throw ConfigError("multiplier: spectrum grid does not match");
  }
  return {f.n_half, f.f.cwiseProduct(m_)};
}

DiagonalSpectrum Multiplier::apply_adjoint(const DiagonalSpectrum& f) const {
  if (f.f.rows() != m_.rows() || f.f.cols() != m_.cols()) {
    throw ConfigError("multiplier: spectrum grid does not match");
  }
  return {f.n_half, f.f.cwiseProduct(m_.conjugate())};
}

DiagonalSpectrum spectral_projection(const DiagonalSpectrum& f, double epsilon,
                                     const Multiplier& m) {
  if (!(epsilon > 0.0)) throw InvalidInput("spectral_projection: epsilon must be positive");
  if (f.f.rows() != m.samples().rows() || f.f.cols() != m.samples().cols()) {
    throw ConfigError("spectral_projection: spectrum grid does not match");
  }
  DiagonalSpectrum out = f;
  for (Eigen::Index c = 0; c < out.f.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.f.rows(); ++r) {
      if (std::abs(m.samples()(r, c)) < epsilon) out.f(r, c) = 0.0;
    }
  }
  return out;
}

int zero_free_order(const CouplingConfig& cfg) {
  const double x = 4.0 * cfg.g_abs;
  int k = 0;
  while (first_positive_zero(k) <= x) ++k;
  return k;
}

ZeroInventory zero_inventory(int k, const CouplingConfig& cfg) {
  if (std::abs(k) > 64) throw RangeError("zero_inventory: |k| must be <= 64");
  cfg.validate();
  ZeroInventory inv;
  inv.k = k;
  const double x_max = 4.0 * cfg.g_abs;
  for (double z : positive_zeros(std::abs(k), x_max)) {
    const double phi = 2.0 * std::asin(std::min(1.0, z / x_max));
    inv.zeros.push_back(-phi);
    inv.zeros.push_back(phi);
  }
  if (k != 0) inv.zeros.push_back(0.0);
  std::sort(inv.zeros.begin(), inv.zeros.end());
  inv.zero_free_order = zero_free_order(cfg);
  return inv;
}

SublevelGeometry::SublevelGeometry(const CouplingConfig& cfg, int k, int resolution)
    : cfg_(cfg), k_(k) {
  if (resolution < kMinResolution) {
    throw ConfigError("sublevel resolution must be >= " + std::to_string(kMinResolution));
  }
  phi_.reserve(static_cast<size_t>(resolution) + 16);
  for (int i = 0; i <= resolution; ++i) phi_.push_back(-kPi + kTwoPi * i / resolution);
  for (double z : zero_inventory(k, cfg).zeros) phi_.push_back(z);
  std::sort(phi_.begin(), phi_.end());
  phi_.erase(std::unique(phi_.begin(), phi_.end()), phi_.end());
  abs_m_.reserve(phi_.size());
  for (double p : phi_) abs_m_.push_back(abs_m(p));
}

double SublevelGeometry::abs_m(double phi) const {
  return kSqrtTwoPi * std::abs(bessel_j(k_, 4.0 * cfg_.g_abs * std::sin(0.5 * phi)));
}

double SublevelGeometry::crossing(double inside, double outside, double epsilon) const {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (inside + outside);
    if (mid == inside || mid == outside) break;
    if (abs_m(mid) < epsilon) {
      inside = mid;
    } else {
      outside = mid;
    }
  }
  return 0.5 * (inside + outside);
}

std::vector<PhiInterval> SublevelGeometry::intervals(double epsilon) const {
  std::vector<PhiInterval> out;
  const size_t n = phi_.size();
  size_t i = 0;
  while (i < n) {
    if (!(abs_m_[i] < epsilon)) {
      ++i;
      continue;
    }
    const size_t first = i;
    while (i + 1 < n && abs_m_[i + 1] < epsilon) ++i;
    const size_t last = i;
    PhiInterval iv;
    iv.lo = first == 0 ? phi_.front() : crossing(phi_[first], phi_[first - 1], epsilon);
    iv.hi = last + 1 == n ? phi_.back() : crossing(phi_[last], phi_[last + 1], epsilon);
    out.push_back(iv);
    ++i;
  }
  return out;
}

double SublevelGeometry::measure(double epsilon) const {
  double total = 0.0;
  for (const auto& iv : intervals(epsilon)) total += iv.length();
  return total;
}

double SublevelGeometry::central_component(double epsilon) const {
  for (const auto& iv : intervals(epsilon)) {
    if (iv.contains(0.0)) return iv.length();
  }
  return 0.0;
}

double sublevel_measure(double epsilon, int k, const CouplingConfig& cfg, int resolution) {
  if (!(epsilon > 0.0)) throw InvalidInput("sublevel_measure: epsilon must be positive");
  if (epsilon > kSqrtTwoPi) return kTwoPi;
  return SublevelGeometry(cfg, k, resolution).measure(epsilon);
}

SublevelReport sublevel_report(double epsilon, int k_max, const CouplingConfig& cfg,
                               int resolution) {
  if (!(epsilon > 0.0)) throw InvalidInput("sublevel_report: epsilon must be positive");
  SublevelReport rep;
  rep.epsilon = epsilon;
  for (int k = -k_max; k <= k_max; ++k) {
    // |m(., -k)| = |m(., k)|: reuse the nonnegative offset.
    const SublevelGeometry geo(cfg, std::abs(k), resolution);
    auto comps = geo.intervals(epsilon);
    double measure = 0.0;
    double central = 0.0;
    for (const auto& iv : comps) {
      measure += iv.length();
      if (iv.contains(0.0)) central = iv.length();
    }
    rep.ks.push_back(k);
    rep.measures.push_back(measure);
    rep.central.push_back(central);
    rep.components.push_back(std::move(comps));
    rep.total += measure;
  }
  return rep;
}

}  // namespace squirrels
