#include "squirrels/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "squirrels/bessel.hpp"
#include "squirrels/errors.hpp"

namespace squirrels {
namespace {

constexpr double kImagResidueTol = 1e-9;

void require_square_window(const ComplexMatrix& rho, const Discretization& disc) {
  if (rho.rows() != disc.dim() || rho.cols() != disc.dim()) {
    throw ConfigError("matrix of size " + std::to_string(rho.rows()) +
                      " does not match window 2N+1 = " + std::to_string(disc.dim()));
  }
}

Spectrogram real_part(const SpectrogramField& y) {
  const double scale = std::max(1.0, y.y.cwiseAbs().maxCoeff());
  if (y.y.imag().cwiseAbs().maxCoeff() > kImagResidueTol * scale) {
    throw InvalidInput("forward image has a non-negligible imaginary part; input not Hermitian");
  }
  return {y.n_half, y.buffer, y.y.real()};
}

// Valid rows of the k-th diagonal: -N <= n <= N and -N <= n + k <= N.
int first_valid(int n_half, int k) { return std::max(-n_half, -n_half - k); }
int last_valid(int n_half, int k) { return std::min(n_half, n_half - k); }

}  // namespace

ComplexMatrix u_omega_matrix(double theta, const CouplingConfig& cfg, int row_half,
                             int col_half) {
  const auto table = bessel_table(2.0 * cfg.g_abs, row_half + col_half);
  ComplexMatrix u(2 * row_half + 1, 2 * col_half + 1);
  for (int k = -row_half; k <= row_half; ++k) {
    for (int l = -col_half; l <= col_half; ++l) {
      u(k + row_half, l + col_half) = std::polar(1.0, (k - l) * theta) * table(k - l);
    }
  }
  return u;
}

Spectrogram apply_direct(const ComplexMatrix& rho, const CouplingConfig& cfg,
                         const Discretization& disc) {
  cfg.validate();
  require_square_window(rho, disc);
  const int n_half = disc.n_half();
  const int out_half = disc.out_half();
  SpectrogramField field{n_half, disc.buffer(),
                         ComplexMatrix::Zero(disc.out_dim(), disc.m_theta())};
  for (int j = 0; j < disc.m_theta(); ++j) {
    const ComplexMatrix u = u_omega_matrix(disc.theta(j), cfg, out_half, n_half);
    const ComplexMatrix w = u * rho;
    field.y.col(j) = w.cwiseProduct(u.conjugate()).rowwise().sum();
  }
  return real_part(field);
}

Spectrogram apply_direct(const DensityMatrix& rho, const CouplingConfig& cfg,
                         const Discretization& disc) {
  return apply_direct(rho.matrix(), cfg, disc);
}

ForwardOperator::ForwardOperator(const CouplingConfig& cfg, const Discretization& disc)
    : cfg_(cfg), disc_(disc), m_(cfg, disc) {}

SpectrogramField ForwardOperator::apply_field(const ComplexMatrix& x) const {
  require_square_window(x, disc_);
  return fourier_12(m_.apply(fourier_1(shift_G(x), disc_)), disc_);
}

Spectrogram ForwardOperator::apply(const ComplexMatrix& rho) const {
  return real_part(apply_field(rho));
}

ComplexMatrix ForwardOperator::adjoint(const Spectrogram& y) const {
  const auto h = fourier_12_adjoint(to_field(y), disc_);
  const ComplexMatrix x = shift_G_adjoint(fourier_1_adjoint(m_.apply_adjoint(h), disc_));
  return 0.5 * (x + x.adjoint());
}

Spectrogram apply_factorized(const ComplexMatrix& rho, const CouplingConfig& cfg,
                             const Discretization& disc) {
  return ForwardOperator(cfg, disc).apply(rho);
}

Spectrogram apply_factorized(const DensityMatrix& rho, const CouplingConfig& cfg,
                             const Discretization& disc) {
  return apply_factorized(rho.matrix(), cfg, disc);
}

ComplexMatrix apply_adjoint(const Spectrogram& y, const CouplingConfig& cfg,
                            const Discretization& disc) {
  return ForwardOperator(cfg, disc).adjoint(y);
}

NormalOperator::NormalOperator(const ForwardOperator& op) : n_half_(op.disc().n_half()) {
  const auto& disc = op.disc();
  const auto& e1 = disc.synthesis_n();
  const auto& wl = disc.analysis_l();
  blocks_.reserve(disc.offsets());
  for (int k = -2 * n_half_; k <= 2 * n_half_; ++k) {
    const int lo = first_valid(n_half_, k);
    const int count = last_valid(n_half_, k) - lo + 1;
    const ComplexMatrix e_valid = e1.middleCols(lo + n_half_, count);
    const ComplexMatrix r =
        wl * (op.multiplier().samples().col(k + 2 * n_half_).asDiagonal() * e_valid);
    ComplexMatrix q = kTwoPi * (r.adjoint() * r);
    blocks_.push_back(0.5 * (q + q.adjoint()));
  }
}

ComplexMatrix NormalOperator::apply(const ComplexMatrix& rho) const {
  const int d = 2 * n_half_ + 1;
  if (rho.rows() != d || rho.cols() != d) throw ConfigError("NormalOperator: window mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  Eigen::VectorXcd diag;
  for (int k = -2 * n_half_; k <= 2 * n_half_; ++k) {
    const int lo = first_valid(n_half_, k);
    const int count = last_valid(n_half_, k) - lo + 1;
    diag.resize(count);
    for (int i = 0; i < count; ++i) diag(i) = rho(lo + i + k + n_half_, lo + i + n_half_);
    const Eigen::VectorXcd res = blocks_[k + 2 * n_half_] * diag;
    for (int i = 0; i < count; ++i) out(lo + i + k + n_half_, lo + i + n_half_) = res(i);
  }
  return out;
}

double NormalOperator::top_eigenvalue() const {
  double top = 0.0;
  for (const auto& q : blocks_) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(q, Eigen::EigenvaluesOnly);
    top = std::max(top, es.eigenvalues().maxCoeff());
  }
  return top;
}

double operator_norm_estimate(const ForwardOperator& op, int max_iter) {
  const int d = op.disc().dim();
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix x(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) x(i, j) = Complex(normal(rng), normal(rng));
  x = (0.5 * (x + x.adjoint())).eval();
  x /= x.norm();

  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const ComplexMatrix y = op.adjoint(op.apply(x));
    const double next = inner(x, y).real();
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (it > 0 && std::abs(next - lambda) < 1e-6 * std::abs(next)) return std::sqrt(next);
    lambda = next;
  }
  throw ConvergenceError("operator_norm_estimate: power iteration did not converge in " +
                         std::to_string(max_iter) + " iterations");
}

double operator_norm_estimate(const CouplingConfig& cfg, const Discretization& disc) {
  return operator_norm_estimate(ForwardOperator(cfg, disc));
}

}  // namespace squirrels
