#include <doctest.h>

#include <random>

#include "squirrels/bessel.hpp"
#include "squirrels/errors.hpp"
#include "squirrels/forward.hpp"
#include "support/oracles.hpp"

using namespace squirrels;

namespace {

double rel_diff(const Spectrogram& a, const Spectrogram& b) {
  return (a.p - b.p).norm() / b.p.norm();
}

Spectrogram random_spectrogram(const Discretization& disc, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Spectrogram y = zero_spectrogram(disc);
  for (int i = 0; i < y.p.rows(); ++i)
    for (int j = 0; j < y.p.cols(); ++j) y.p(i, j) = n(rng);
  return y;
}

}  // namespace

TEST_CASE("u_omega_matrix") {
  const ComplexMatrix small = u_omega_matrix(0.7, CouplingConfig{1e-12}, 3, 3);
  CHECK((small - ComplexMatrix::Identity(7, 7)).norm() <= 1e-11);

  const double g = 1.2;
  const ComplexMatrix u0 = u_omega_matrix(0.0, CouplingConfig{g}, 4, 4);
  for (int k = -4; k <= 4; ++k)
    for (int l = -4; l <= 4; ++l) {
      CHECK(u0(k + 4, l + 4).imag() == 0.0);
      CHECK(std::abs(u0(k + 4, l + 4).real() - oracle::bessel_signed(k - l, 2 * g)) <= 1e-12);
    }

  const Discretization disc(6, CouplingConfig{g});
  const ComplexMatrix u = u_omega_matrix(1.1, CouplingConfig{g}, disc.out_half(), disc.n_half());
  const ComplexMatrix gram = u.adjoint() * u;
  CHECK((gram - ComplexMatrix::Identity(disc.dim(), disc.dim())).cwiseAbs().maxCoeff() <=
        10 * disc.tail_tol());
  const ComplexMatrix ref = oracle::u_matrix(1.1, g, disc.out_half(), disc.n_half());
  CHECK((u - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("direct form examples") {
  const double g = 0.8;
  const int N = 5;
  const Discretization disc(N, CouplingConfig{g});
  ComplexMatrix e0 = ComplexMatrix::Zero(disc.dim(), disc.dim());
  e0(N, N) = 1.0;
  const auto direct = apply_direct(e0, CouplingConfig{g}, disc);
  const auto fact = apply_factorized(e0, CouplingConfig{g}, disc);
  for (int l = -disc.out_half(); l <= disc.out_half(); ++l) {
    const double expect = std::pow(oracle::bessel_signed(l, 1.6), 2);
    for (int j = 0; j < disc.m_theta(); ++j) {
      CHECK(std::abs(direct.at(l, j) - expect) <= 1e-14);
      CHECK(std::abs(fact.at(l, j) - expect) <= 1e-12);
    }
  }

  std::mt19937_64 rng(2);
  ComplexMatrix diag = ComplexMatrix::Zero(disc.dim(), disc.dim());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < disc.dim(); ++i) diag(i, i) = u(rng);
  diag /= diag.trace().real();
  for (const auto& y : {apply_direct(diag, CouplingConfig{g}, disc),
                        apply_factorized(diag, CouplingConfig{g}, disc)}) {
    for (int l = -disc.out_half(); l <= disc.out_half(); ++l)
      for (int j = 1; j < disc.m_theta(); ++j)
        CHECK(std::abs(y.at(l, j) - y.at(l, 0)) <= 1e-13);
  }

  const ComplexMatrix rho = oracle::random_density(disc.dim(), rng);
  const auto yd = apply_direct(rho, CouplingConfig{g}, disc);
  for (int j = 0; j < disc.m_theta(); j += 9) {
    const auto ref = oracle::conjugated_diagonal(rho, disc.theta(j), g, disc.out_half());
    for (int l = 0; l < disc.out_dim(); ++l) CHECK(std::abs(yd.p(l, j) - ref[l]) <= 1e-12);
  }
  for (int j = 0; j < disc.m_theta(); ++j) {
    CHECK(std::abs(yd.p.col(j).sum() - 1.0) <= 1e-12);
    CHECK(yd.p.col(j).minCoeff() >= -1e-10);
  }
}

TEST_CASE("factorized form equals direct form") {
  std::mt19937_64 rng(12);
  for (int N : {4, 8}) {
    for (double g : {0.5, 1.0, 2.0}) {
      const Discretization disc(N, CouplingConfig{g});
      for (int t = 0; t < 3; ++t) {
        const ComplexMatrix rho = oracle::random_density(disc.dim(), rng);
        CHECK(rel_diff(apply_factorized(rho, CouplingConfig{g}, disc),
                       apply_direct(rho, CouplingConfig{g}, disc)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("factorized form with an isometric multiplier") {
  // With m = 1 the pipeline is an isometry up to aliasing on the output window.
  const int N = 4;
  const Discretization disc(N, CouplingConfig{1.0});
  std::mt19937_64 rng(21);
  const ComplexMatrix rho = oracle::random_hermitian(disc.dim(), rng);
  const auto y = fourier_12(fourier_1(shift_G(rho), disc), disc);
  CHECK(std::abs(norm(y) - rho.norm()) <= 1e-12 * rho.norm());
}

TEST_CASE("adjoint identity") {
  const Discretization disc(10, CouplingConfig{1.0});
  const ForwardOperator op(CouplingConfig{1.0}, disc);
  std::mt19937_64 rng(99);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix rho = oracle::random_hermitian(disc.dim(), rng);
    const auto y = random_spectrogram(disc, rng);
    const double lhs = inner(op.apply(rho), y);
    const ComplexMatrix ty = op.adjoint(y);
    CHECK((ty - ty.adjoint()).norm() == 0.0);
    const double rhs = inner(rho, ty).real();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  }
  CHECK(op.adjoint(zero_spectrogram(disc)).norm() == 0.0);
  const auto y1 = random_spectrogram(disc, rng);
  const auto y2 = random_spectrogram(disc, rng);
  Spectrogram comb = y1;
  comb.p = 2.0 * y1.p - 0.5 * y2.p;
  const ComplexMatrix lin = op.adjoint(comb) - (2.0 * op.adjoint(y1) - 0.5 * op.adjoint(y2));
  CHECK(lin.norm() <= 1e-12 * op.adjoint(comb).norm());
}

TEST_CASE("normal operator matches adjoint after forward") {
  const Discretization disc(6, CouplingConfig{1.0});
  const ForwardOperator op(CouplingConfig{1.0}, disc);
  const NormalOperator normal(op);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    const ComplexMatrix rho = oracle::random_hermitian(disc.dim(), rng);
    const ComplexMatrix a = op.adjoint(op.apply(rho));
    const ComplexMatrix b = normal.apply(rho);
    CHECK((a - b).norm() <= 1e-12 * a.norm());
  }
}

TEST_CASE("operator norm estimate") {
  const CouplingConfig cfg{1.0};
  const Discretization disc(16, cfg);
  const ForwardOperator op(cfg, disc);
  const double est = operator_norm_estimate(op);
  CHECK(est <= kSqrtTwoPi);
  const double grid_max = op.multiplier().max_abs();
  CHECK(std::abs(est - grid_max) <= 0.02 * grid_max);
  const double exact = std::sqrt(NormalOperator(op).top_eigenvalue());
  CHECK(std::abs(est - exact) <= 1e-5 * exact);

  const Discretization coarse(6, cfg);
  const Discretization fine(6, cfg, {1e-13, -1, 0, 4 * coarse.m_phi()});
  const double a = std::sqrt(NormalOperator(ForwardOperator(cfg, coarse)).top_eigenvalue());
  const double b = std::sqrt(NormalOperator(ForwardOperator(cfg, fine)).top_eigenvalue());
  CHECK(b >= a * (1 - 1e-9));
}

TEST_CASE("non-Hermitian input is rejected by the real-valued forward map") {
  const Discretization disc(3, CouplingConfig{1.0});
  ComplexMatrix x = ComplexMatrix::Zero(7, 7);
  x(0, 1) = 1.0;
  CHECK_THROWS_AS(apply_factorized(x, CouplingConfig{1.0}, disc), InvalidInput);
  CHECK_THROWS_AS(apply_direct(x, CouplingConfig{1.0}, disc), InvalidInput);
  CHECK_THROWS_AS(apply_direct(ComplexMatrix::Identity(5, 5), CouplingConfig{1.0}, disc),
                  ConfigError);
}
