#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "squirrels/analysis.hpp"
#include "squirrels/errors.hpp"
#include "squirrels/forward.hpp"
#include "squirrels/states.hpp"

using namespace squirrels;

namespace {

struct Fixture {
  CouplingConfig cfg{1.0};
  Discretization disc{8, cfg};
};

}  // namespace

TEST_CASE("log grids") {
  const auto g = log_grid(1e-4, 1.0, 10);
  CHECK(g.size() == 41);
  CHECK(g.front() == 1e-4);
  CHECK(g.back() == 1.0);
  CHECK(g[10] == doctest::Approx(1e-3));
  const auto eps = epsilon_grid();
  CHECK(eps.front() == 1e-8);
  CHECK(eps.back() == doctest::Approx(kSqrtTwoPi));
  CHECK_THROWS_AS(log_grid(1.0, 0.5, 10), InvalidInput);
}

TEST_CASE("kappa tables") {
  Fixture f;
  const auto rho = make_band_limited(8, 1, 3);
  const auto eps = epsilon_grid();
  const auto kappa = measure_kappa(rho, eps, f.cfg, f.disc);
  REQUIRE(kappa.size() == eps.size());
  for (size_t i = 1; i < kappa.size(); ++i) CHECK(kappa[i] >= kappa[i - 1] * (1.0 - 1e-12));
  CHECK(kappa.back() == doctest::Approx(rho.matrix().norm()).epsilon(1e-6));
  const auto above = measure_kappa(rho, {3.0}, f.cfg, f.disc);
  CHECK(above[0] == doctest::Approx(rho.matrix().norm()).epsilon(1e-12));
  CHECK(log_log_slope(eps, kappa, 1e-6, 1e-2) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(kappa.front() / kappa.back() < 1e-3);

  const auto diag = make_band_limited(8, 0, 5);
  const auto kd = measure_kappa(diag, eps, f.cfg, f.disc);
  CHECK(log_log_slope(eps, kd, 1e-6, 1e-2) == doctest::Approx(0.5).epsilon(0.1));

  CHECK_THROWS_AS(measure_kappa(rho, {1e-3, 1e-4}, f.cfg, f.disc), InvalidInput);
  CHECK_THROWS_AS(measure_kappa(rho, {1e-3}, f.cfg, Discretization(4, f.cfg)), ConfigError);
}

TEST_CASE("sigma from kappa") {
  const auto eps = log_grid(1e-6, 1e-1, 10);
  std::vector<double> root(eps.size());
  for (size_t i = 0; i < eps.size(); ++i) root[i] = std::sqrt(eps[i]);
  const auto s = sigma_from_kappa(eps, root, 1.0 / 3.0);
  for (size_t i = 0; i < eps.size(); ++i) {
    CHECK(s[i] == doctest::Approx(1.0 / (std::sqrt(2.0) * std::sqrt(eps[i]))).epsilon(1e-12));
  }
  std::vector<double> slow(eps.size());
  for (size_t i = 0; i < eps.size(); ++i) slow[i] = std::pow(eps[i], 0.3);
  const auto s1 = sigma_from_kappa(eps, slow, 1.0 / 3.0);
  const auto s2 = sigma_from_kappa(eps, slow, 2.0 / 3.0);
  for (size_t i = 0; i < eps.size(); ++i) CHECK(s2[i] == doctest::Approx(s1[i] / std::sqrt(2.0)));

  const std::vector<double> flat(eps.size(), 0.7);
  const auto sf = sigma_from_kappa(eps, flat, 0.5);
  CHECK(sf[3] == doctest::Approx(0.7 / (std::sqrt(3.0) * eps[3])));

  std::vector<double> steep(eps.size());
  for (size_t i = 0; i < eps.size(); ++i) steep[i] = eps[i];
  steep[5] = steep[6] * 0.5;
  try {
    sigma_from_kappa(eps, steep, 1.0 / 3.0);
    FAIL("expected HypothesisError");
  } catch (const HypothesisError& e) {
    CHECK(e.eps_lo() == eps[0]);
    CHECK(e.eps_hi() == eps[1]);
  }
  CHECK_THROWS_AS(sigma_from_kappa(eps, root, 1.0), InvalidInput);
}

TEST_CASE("the sigma gate fails on the full grid and passes on the small-eps index set") {
  Fixture f;
  const auto rho = make_band_limited(8, 1, 3);
  const auto eps = epsilon_grid();
  const auto kappa = measure_kappa(rho, eps, f.cfg, f.disc);
  CHECK_THROWS_AS(sigma_from_kappa(eps, kappa, 1.0 / 3.0), HypothesisError);

  const auto cert = vsc_certificate(rho, PriorClass::band_limited(1), f.cfg, f.disc);
  CHECK(cert.nu == doctest::Approx(1.0 / 3.0));
  CHECK(cert.kappa_monotone);
  CHECK(cert.psi_monotone);
  CHECK(cert.psi_concave);
  CHECK(cert.kappa_slope == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(cert.fit.exponent - 1.0 / 3.0) <= 0.05);
  CHECK(cert.fit.c > 0.0);
  CHECK(cert.fit.c_envelope >= cert.fit.c);
  CHECK(cert.sigma.size() < cert.epsilons.size());
  CHECK(cert.psi.size() == cert.taus.size());
}

TEST_CASE("psi table") {
  const auto eps = log_grid(1e-8, 1.0, 20);
  std::vector<double> kappa(eps.size());
  for (size_t i = 0; i < eps.size(); ++i) kappa[i] = std::sqrt(eps[i]);
  const auto sigma = sigma_from_kappa(eps, kappa, 1.0 / 3.0);
  const auto table = build_psi(eps, kappa, sigma);
  CHECK(table.monotone());
  CHECK(table.concave());
  const auto fit = table.fit(PriorClass::band_limited(1));
  CHECK(fit.exponent == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  CHECK(table(0.0) == doctest::Approx(kappa.front() * kappa.front()));
  CHECK(table.argmin(1e-12) > eps.front());
}

TEST_CASE("rate functions") {
  const auto holder = rate_function(PriorClass::band_limited(1), 2.0);
  CHECK(holder(1e-3) == doctest::Approx(2.0 * 0.1).epsilon(1e-12));
  CHECK(holder(1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(holder(1.5), DomainError);
  CHECK_THROWS_AS(holder(0.0), DomainError);

  const auto expo = rate_function(PriorClass::exponential(0.5), 1.0);
  CHECK(expo(1e-4) == doctest::Approx(std::exp(-std::sqrt(std::log(1e4) * std::log(2.0)))));
  CHECK_NOTHROW(expo(0.5));
  CHECK_THROWS_AS(expo(0.6), DomainError);

  const auto poly = rate_function(PriorClass::polynomial(0.5), 1.0);
  CHECK_THROWS_AS(poly(0.3), DomainError);
  CHECK_NOTHROW(poly(0.25));

  // Phi(t) = 2 sqrt(psi(t^2)) for each prior kind.
  for (const auto& rf : {holder, expo, poly, rate_function(PriorClass::band_limited(3), 0.3)}) {
    const auto psi = rf.psi();
    for (double t : log_grid(1e-10, 0.2, 4)) {
      CHECK(std::abs(rf(t) - 2.0 * std::sqrt(psi(t * t))) <= 1e-12 * rf(t));
    }
  }

  // Strictly increasing and vanishing at zero.
  for (const auto& rf : {holder, expo, poly}) {
    double prev = 0.0;
    for (double t : log_grid(1e-12, 0.2, 2)) {
      CHECK(rf(t) > prev);
      prev = rf(t);
    }
    CHECK(rf(1e-300) < 0.2);
  }
}

TEST_CASE("sub-Hölder rate trends") {
  const double mu = 0.5;
  const auto poly = rate_function(PriorClass::polynomial(mu), 1.0);
  double prev_up = 0.0;
  double prev_down = 1e300;
  for (int e = 3; e <= 12; ++e) {
    const double d = std::pow(10.0, -e);
    const double s = -std::log(d);
    const double up = poly(d) / std::pow(s, -2.0 * mu);
    const double down = poly(d) * std::pow(s, mu);
    CHECK(up > prev_up);
    CHECK(down < prev_down);
    prev_up = up;
    prev_down = down;
  }

  // Far-field trends in log form: Phi / delta^0.1 -> inf and Phi (-log delta)^10 -> 0.
  const auto expo = rate_function(PriorClass::exponential(0.5), 1.0);
  double prev_holder = -1e300;
  double prev_log = 1e300;
  for (double s : {1e2, 1e3, 1e4, 1e6, 1e8}) {
    const double vs_holder = expo.log_rate(s) + 0.1 * s;
    const double vs_log = expo.log_rate(s) + 10.0 * std::log(s);
    CHECK(vs_holder > prev_holder);
    if (s >= 1e4) CHECK(vs_log < prev_log);
    prev_holder = vs_holder;
    prev_log = vs_log;
  }
  CHECK(expo.log_rate(1e8) + 10.0 * std::log(1e8) < -1e3);
}

TEST_CASE("singular spectrum") {
  const CouplingConfig cfg{1.0};
  double prev_min = 1e300;
  for (int n : {4, 6, 8}) {
    const Discretization disc(n, cfg);
    const auto sp = singular_spectrum(cfg, disc, 3);
    REQUIRE(sp.largest.size() == 3);
    CHECK(sp.all.size() == static_cast<size_t>((2 * n + 1) * (2 * n + 1)));
    CHECK(std::abs(sp.largest[0] / operator_norm_estimate(cfg, disc) - 1.0) <= 0.02);
    CHECK(sp.smallest[0] > 0.0);
    CHECK(sp.smallest[0] < prev_min);
    CHECK(sp.smallest[0] <= sp.smallest[1]);
    prev_min = sp.smallest[0];
  }
  CHECK_THROWS_AS(singular_spectrum(cfg, Discretization(13, cfg), 1), ResourceError);
}

TEST_CASE("stability check") {
  Fixture f;
  const auto prior = PriorClass::band_limited(1);
  const auto a = make_band_limited(8, 1, 1);
  const auto same = stability_check(a, a, prior, f.cfg, f.disc);
  CHECK(same.state_distance == 0.0);
  CHECK(same.data_distance == 0.0);
  CHECK(same.ratio == 0.0);

  std::vector<double> states, data, ratios;
  for (int i = 0; i < 50; ++i) {
    const auto b = make_band_limited(8, 1, 100 + i);
    const double t = std::pow(10.0, -4.0 + 4.0 * i / 49.0);
    const auto c = DensityMatrix::from_matrix((1.0 - t) * a.matrix() + t * b.matrix());
    const auto rep = stability_check(a, c, prior, f.cfg, f.disc);
    CHECK(rep.in_domain);
    states.push_back(rep.state_distance);
    data.push_back(rep.data_distance);
    ratios.push_back(rep.ratio);
  }
  CHECK(log_log_slope(states, data) <= 3.0);
  CHECK(*std::max_element(ratios.begin(), ratios.end()) < 1e3);
}
