#include "squirrels/states.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "squirrels/bessel.hpp"
#include "squirrels/errors.hpp"

namespace squirrels {
namespace {

constexpr double kSymmetrizeTol = 1e-10;
constexpr double kEigenClamp = 1e-13;

ComplexMatrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix a(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      a(i, j) = Complex(re, im);
    }
  }
  return a;
}

double hermitian_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix normalized_gram(const ComplexMatrix& a) {
  ComplexMatrix rho = a * a.adjoint();
  const double tr = rho.trace().real();
  rho /= tr;
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace

DensityDefects measure_defects(const ComplexMatrix& m) {
  DensityDefects d;
  if (m.rows() == 0 || m.rows() != m.cols()) {
    d.hermitian = d.trace_error = std::numeric_limits<double>::infinity();
    return d;
  }
  d.hermitian = hermitian_defect(m);
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  d.trace_error = std::abs(m.trace().real() - 1.0);
  d.trace_imag = std::abs(m.trace().imag());
  return d;
}

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m) {
  if (m.rows() != m.cols() || m.rows() % 2 == 0) {
    throw InvalidInput("density matrix must be square with odd size 2N+1");
  }
  const auto d = measure_defects(m);
  if (d.hermitian > kHermitianTol) {
    throw InvalidInput("density matrix not Hermitian (defect " + std::to_string(d.hermitian) + ")");
  }
  if (d.min_eigenvalue < -kEigenTol) {
    throw InvalidInput("density matrix not positive semidefinite (min eigenvalue " +
                       std::to_string(d.min_eigenvalue) + ")");
  }
  if (d.trace_error > kTraceTol || d.trace_imag > kTraceTol) {
    throw InvalidInput("density matrix trace differs from 1 by " +
                       std::to_string(d.trace_error));
  }
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int n_half) {
  const int d = 2 * n_half + 1;
  return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

PriorClass PriorClass::band_limited(int k0) {
  PriorClass p;
  p.kind = PriorKind::band_limited;
  p.k0 = k0;
  p.validate();
  return p;
}

PriorClass PriorClass::polynomial(double mu, double c_rho) {
  PriorClass p;
  p.kind = PriorKind::polynomial;
  p.k0 = 0;
  p.mu = mu;
  p.c_rho = c_rho;
  p.validate();
  return p;
}

PriorClass PriorClass::exponential(double b, double c_rho) {
  PriorClass p;
  p.kind = PriorKind::exponential;
  p.k0 = 0;
  p.b = b;
  p.c_rho = c_rho;
  p.validate();
  return p;
}

void PriorClass::validate() const {
  switch (kind) {
    case PriorKind::band_limited:
      if (k0 < 0) throw InvalidInput("band-limited prior needs k0 >= 0");
      return;
    case PriorKind::polynomial:
      if (!(mu > 0.0)) throw InvalidInput("polynomial prior needs mu > 0");
      break;
    case PriorKind::exponential:
      if (!(b > 0.0 && b < 1.0)) throw InvalidInput("exponential prior needs b in (0, 1)");
      break;
  }
  if (!(c_rho > 0.0)) throw InvalidInput("prior constant C_rho must be positive");
}

double PriorClass::envelope(int k) const {
  const int a = std::abs(k);
  switch (kind) {
    case PriorKind::band_limited:
      return a <= k0 ? std::numeric_limits<double>::infinity() : 0.0;
    case PriorKind::polynomial:
      return a == 0 ? std::numeric_limits<double>::infinity()
                    : c_rho * std::pow(static_cast<double>(a), -0.5 - 2.0 * mu);
    case PriorKind::exponential:
      return c_rho * std::pow(b, a);
  }
  return 0.0;
}

bool PriorClass::admits(const ComplexMatrix& rho, double tol) const {
  if (kind == PriorKind::band_limited) {
    const int n_half = static_cast<int>(rho.rows() / 2);
    for (int k = k0 + 1; k <= 2 * n_half; ++k) {
      for (int n = -n_half; n + k <= n_half; ++n) {
        if (rho(n + k + n_half, n + n_half) != Complex(0.0) ||
            rho(n + n_half, n + k + n_half) != Complex(0.0)) {
          return false;
        }
      }
    }
    return true;
  }
  const auto sums = diagonal_abs_sums(rho);
  for (size_t k = 0; k < sums.size(); ++k) {
    if (sums[k] > envelope(static_cast<int>(k)) * (1.0 + tol) + tol) return false;
  }
  return true;
}

const char* to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::band_limited:
      return "band_limited";
    case PriorKind::polynomial:
      return "polynomial";
    case PriorKind::exponential:
      return "exponential";
  }
  return "unknown";
}

std::vector<double> diagonal_abs_sums(const ComplexMatrix& rho) {
  const int n_half = static_cast<int>(rho.rows() / 2);
  std::vector<double> sums(static_cast<size_t>(2 * n_half) + 1, 0.0);
  for (int k = 0; k <= 2 * n_half; ++k) {
    for (int n = -n_half; n + k <= n_half; ++n) {
      sums[k] += std::abs(rho(n + k + n_half, n + n_half));
    }
  }
  return sums;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double threshold = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) threshold = t;
  }
  return (v.array() - threshold).cwiseMax(0.0);
}

DensityMatrix project_to_constraint(const ComplexMatrix& h) {
  if (h.rows() != h.cols() || h.rows() % 2 == 0) {
    throw InvalidInput("project_to_constraint: expected a square matrix of odd size");
  }
  const double defect = hermitian_defect(h);
  if (!(defect <= kSymmetrizeTol)) {
    throw InvalidInput("project_to_constraint: input not Hermitian (defect " +
                       std::to_string(defect) + ")");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
  Eigen::VectorXd lambda = project_to_simplex(es.eigenvalues());
  lambda = (lambda.array() < kEigenClamp).select(0.0, lambda);
  lambda /= lambda.sum();
  const ComplexMatrix& v = es.eigenvectors();
  ComplexMatrix out = v * lambda.cast<Complex>().asDiagonal() * v.adjoint();
  out = (0.5 * (out + out.adjoint())).eval();
  return DensityMatrix::from_matrix(std::move(out));
}

DensityMatrix make_band_limited(int n_half, int k0, std::uint64_t seed) {
  if (n_half < 0) throw InvalidInput("make_band_limited: N must be >= 0");
  if (k0 < 0 || k0 > 2 * n_half) {
    throw InvalidInput("make_band_limited: bandwidth k0 = " + std::to_string(k0) +
                       " infeasible for window N = " + std::to_string(n_half));
  }
  const int d = 2 * n_half + 1;
  std::mt19937_64 rng(seed);
  ComplexMatrix a = gaussian_matrix(d, d, rng);
  // Lower-banded factor: A_{i,m} != 0 only for 0 <= i - m <= k0, hence
  // (A A^*)_{ij} = 0 whenever |i - j| > k0.
  for (int i = 0; i < d; ++i) {
    for (int m = 0; m < d; ++m) {
      if (i - m < 0 || i - m > k0) a(i, m) = 0.0;
    }
  }
  return DensityMatrix::from_matrix(normalized_gram(a));
}

std::pair<DensityMatrix, PriorClass> make_decaying(int n_half, PriorKind kind, double param,
                                                   std::uint64_t seed) {
  if (kind == PriorKind::band_limited) {
    throw InvalidInput("make_decaying: use make_band_limited for band-limited states");
  }
  PriorClass prior = kind == PriorKind::polynomial ? PriorClass::polynomial(param)
                                                   : PriorClass::exponential(param);
  const int d = 2 * n_half + 1;
  std::mt19937_64 rng(seed);
  const ComplexMatrix v = gaussian_matrix(d, 1, rng);
  const ComplexMatrix pure = normalized_gram(v);

  // Schur product with a positive definite Toeplitz kernel of unit diagonal:
  // PSD and trace are preserved and S_k <= kernel(k).
  ComplexMatrix rho(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int k = std::abs(i - j);
      const double kernel = kind == PriorKind::polynomial
                                ? std::pow(1.0 + k, -0.5 - 2.0 * prior.mu)
                                : std::pow(prior.b, k);
      rho(i, j) = kernel * pure(i, j);
    }
  }
  rho = (0.5 * (rho + rho.adjoint())).eval();
  rho /= rho.trace().real();

  const auto sums = diagonal_abs_sums(rho);
  double c = 0.0;
  for (int k = kind == PriorKind::polynomial ? 1 : 0; k < static_cast<int>(sums.size()); ++k) {
    const double unit = kind == PriorKind::polynomial
                            ? std::pow(static_cast<double>(k), -0.5 - 2.0 * prior.mu)
                            : std::pow(prior.b, k);
    c = std::max(c, sums[k] / unit);
  }
  prior.c_rho = c > 0.0 ? c : 1.0;
  return {DensityMatrix::from_matrix(std::move(rho)), prior};
}

DensityMatrix make_pinem_state(int n_half, Complex g, double theta0) {
  const double g_abs = std::abs(g);
  if (g_abs > 10.0) throw InvalidInput("make_pinem_state: |g| must be <= 10");
  const int d = 2 * n_half + 1;
  const auto table = bessel_table(2.0 * g_abs, n_half);
  Eigen::VectorXcd v(d);
  for (int j = -n_half; j <= n_half; ++j) {
    v(j + n_half) = table(j) * std::polar(1.0, j * theta0);
  }
  return DensityMatrix::from_matrix(normalized_gram(v));
}

DensityMatrix make_random_density(int n_half, std::uint64_t seed, int rank) {
  const int d = 2 * n_half + 1;
  const int r = rank <= 0 ? d : std::min(rank, d);
  std::mt19937_64 rng(seed);
  return DensityMatrix::from_matrix(normalized_gram(gaussian_matrix(d, r, rng)));
}

}  // namespace squirrels
