#include "squirrels/grids.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "squirrels/bessel.hpp"
#include "squirrels/errors.hpp"

namespace squirrels {

void CouplingConfig::validate() const {
  if (!(g_abs > 0.0 && g_abs <= 10.0)) {
    throw ConfigError("coupling |g| = " + std::to_string(g_abs) +
                      " outside supported range (0, 10]");
  }
}

int Discretization::required_buffer(double g_abs, double tol) {
  // max_{k > B} |J_k(4|g|)| < tol
  return std::max(0, bessel_tail_order(4.0 * g_abs, tol) - 1);
}

Discretization::Discretization(int n_half, const CouplingConfig& cfg)
    : Discretization(n_half, cfg, Options{}) {}

Discretization::Discretization(int n_half, const CouplingConfig& cfg,
                               const Options& opts)
    : n_half_(n_half), tail_tol_(opts.tail_tol) {
  cfg.validate();
  if (n_half < 0) throw ConfigError("window half-width N must be >= 0");
  if (!(opts.tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");

  buffer_ = opts.buffer >= 0 ? opts.buffer : required_buffer(cfg.g_abs, tail_tol_);
  m_theta_ = opts.m_theta > 0
                 ? opts.m_theta
                 : static_cast<int>(std::bit_ceil(static_cast<unsigned>(4 * n_half + 4)));
  m_phi_ = opts.m_phi > 0 ? opts.m_phi : out_dim();

  if (m_theta_ < 4 * n_half + 2) {
    throw ConfigError("M_theta = " + std::to_string(m_theta_) + " < 4N + 2 = " +
                      std::to_string(4 * n_half + 2));
  }
  if (m_phi_ < out_dim()) {
    throw ConfigError("M_phi = " + std::to_string(m_phi_) + " < 2(N + B) + 1 = " +
                      std::to_string(out_dim()));
  }

  auto t = std::make_shared<Tables>();
  const int d = dim();
  t->e1.resize(m_phi_, d);
  for (int j = 0; j < m_phi_; ++j) {
    for (int n = -n_half_; n <= n_half_; ++n) {
      t->e1(j, n + n_half_) = std::polar(1.0 / kSqrtTwoPi, n * phi(j));
    }
  }
  t->wl.resize(out_dim(), m_phi_);
  for (int l = -out_half(); l <= out_half(); ++l) {
    for (int j = 0; j < m_phi_; ++j) {
      t->wl(l + out_half(), j) = std::polar(1.0 / m_phi_, -l * phi(j));
    }
  }
  t->vt.resize(offsets(), m_theta_);
  for (int k = -2 * n_half_; k <= 2 * n_half_; ++k) {
    for (int j = 0; j < m_theta_; ++j) {
      t->vt(k + 2 * n_half_, j) = std::polar(1.0, -k * theta(j));
    }
  }
  tables_ = std::move(t);
}

Complex inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

Complex inner(const DiagonalStack& a, const DiagonalStack& b) { return inner(a.d, b.d); }

Complex inner(const DiagonalSpectrum& a, const DiagonalSpectrum& b) {
  return a.weight() * inner(a.f, b.f);
}

Complex inner(const SpectrogramField& a, const SpectrogramField& b) {
  return a.weight() * inner(a.y, b.y);
}

double inner(const Spectrogram& a, const Spectrogram& b) {
  return a.weight() * (a.p.cwiseProduct(b.p)).sum();
}

double norm(const DiagonalSpectrum& f) { return std::sqrt(f.weight()) * f.f.norm(); }
double norm(const SpectrogramField& y) { return std::sqrt(y.weight()) * y.y.norm(); }
double norm(const Spectrogram& y) { return std::sqrt(y.weight()) * y.p.norm(); }

DiagonalStack shift_G(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() % 2 == 0) {
    throw ConfigError("shift_G: expected a square matrix of odd size 2N+1");
  }
  const int n_half = static_cast<int>(rho.rows() / 2);
  DiagonalStack s{n_half, ComplexMatrix::Zero(2 * n_half + 1, 4 * n_half + 1)};
  for (int k = -2 * n_half; k <= 2 * n_half; ++k) {
    for (int n = -n_half; n <= n_half; ++n) {
      if (DiagonalStack::valid(n_half, n, k)) {
        s.d(n + n_half, k + 2 * n_half) = rho(n + k + n_half, n + n_half);
      }
    }
  }
  return s;
}

ComplexMatrix shift_G_adjoint(const DiagonalStack& stack) {
  const int n_half = stack.n_half;
  ComplexMatrix rho = ComplexMatrix::Zero(2 * n_half + 1, 2 * n_half + 1);
  for (int k = -2 * n_half; k <= 2 * n_half; ++k) {
    for (int n = -n_half; n <= n_half; ++n) {
      if (DiagonalStack::valid(n_half, n, k)) {
        rho(n + k + n_half, n + n_half) = stack.d(n + n_half, k + 2 * n_half);
      }
    }
  }
  return rho;
}

namespace {

void require_window(int n_half, const Discretization& disc, const char* who) {
  if (n_half != disc.n_half()) {
    throw ConfigError(std::string(who) + ": window N = " + std::to_string(n_half) +
                      " does not match discretization N = " +
                      std::to_string(disc.n_half()));
  }
}

}  // namespace

DiagonalSpectrum fourier_1(const DiagonalStack& stack, const Discretization& disc) {
  require_window(stack.n_half, disc, "fourier_1");
  return {stack.n_half, disc.synthesis_n() * stack.d};
}

DiagonalStack fourier_1_adjoint(const DiagonalSpectrum& f, const Discretization& disc) {
  require_window(f.n_half, disc, "fourier_1_adjoint");
  if (f.f.rows() != disc.m_phi()) throw ConfigError("fourier_1_adjoint: phi grid mismatch");
  return {f.n_half, disc.phi_weight() * (disc.synthesis_n().adjoint() * f.f)};
}

SpectrogramField fourier_12(const DiagonalSpectrum& h, const Discretization& disc) {
  require_window(h.n_half, disc, "fourier_12");
  if (h.f.rows() != disc.m_phi() || h.f.cols() != disc.offsets()) {
    throw ConfigError("fourier_12: spectrum is not sampled on the discretization grid");
  }
  // phi -> l per offset, then offsets -> theta.
  ComplexMatrix per_offset = disc.analysis_l() * h.f;
  return {disc.n_half(), disc.buffer(), per_offset * disc.synthesis_theta()};
}

DiagonalSpectrum fourier_12_adjoint(const SpectrogramField& y, const Discretization& disc) {
  require_window(y.n_half, disc, "fourier_12_adjoint");
  if (y.buffer != disc.buffer() || y.y.rows() != disc.out_dim() ||
      y.y.cols() != disc.m_theta()) {
    throw ConfigError("fourier_12_adjoint: spectrogram grid mismatch");
  }
  const double scale = static_cast<double>(disc.m_phi()) / disc.m_theta();
  ComplexMatrix per_offset = y.y * disc.synthesis_theta().adjoint();
  return {disc.n_half(), scale * (disc.analysis_l().adjoint() * per_offset)};
}

DiagonalStack zero_stack(const Discretization& disc) {
  return {disc.n_half(), ComplexMatrix::Zero(disc.dim(), disc.offsets())};
}

DiagonalSpectrum zero_spectrum(const Discretization& disc) {
  return {disc.n_half(), ComplexMatrix::Zero(disc.m_phi(), disc.offsets())};
}

Spectrogram zero_spectrogram(const Discretization& disc) {
  return {disc.n_half(), disc.buffer(), RealMatrix::Zero(disc.out_dim(), disc.m_theta())};
}

SpectrogramField to_field(const Spectrogram& y) {
  return {y.n_half, y.buffer, y.p.cast<Complex>()};
}

}  // namespace squirrels
