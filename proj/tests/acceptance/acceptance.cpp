// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "squirrels/analysis.hpp"
#include "squirrels/errors.hpp"
#include "squirrels/experiments.hpp"
#include "squirrels/forward.hpp"
#include "squirrels/multiplier.hpp"
#include "squirrels/states.hpp"
#include "support/oracles.hpp"

using namespace squirrels;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs > budget_s) {
    o.pass = false;
    o.detail += "; over the " + fmt("%.0f", budget_s) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

Outcome factorization() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int n : {4, 8, 16}) {
    for (double g : {0.5, 1.0, 2.0}) {
      const CouplingConfig cfg{g};
      const Discretization disc(n, cfg);
      for (int t = 0; t < 20; ++t) {
        const ComplexMatrix rho = oracle::random_density(disc.dim(), rng);
        const auto d = apply_direct(rho, cfg, disc);
        const auto f = apply_factorized(rho, cfg, disc);
        worst = std::max(worst, (d.p - f.p).norm() / d.p.norm());
      }
    }
  }
  return {worst <= 1e-8, "max relative discrepancy " + fmt("%.2e", worst)};
}

Outcome multiplier_identity() {
  double worst = 0.0;
  for (double g : {0.5, 1.0, 2.0}) {
    const CouplingConfig cfg{g};
    const Discretization disc(8, cfg);
    const Multiplier m(cfg, disc);
    for (int j = 0; j < disc.m_phi(); ++j) {
      for (int k = -m.k_cutoff(); k <= m.k_cutoff(); ++k) {
        worst = std::max(worst, std::abs(m_fourier_series(disc.phi(j), k, cfg) - m.at(j, k)));
      }
    }
  }
  return {worst <= 1e-10, "max |closed form - series| " + fmt("%.2e", worst)};
}

Outcome adjoint_exactness() {
  const CouplingConfig cfg{1.0};
  const Discretization disc(10, cfg);
  const ForwardOperator op(cfg, disc);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix rho = oracle::random_hermitian(disc.dim(), rng);
    Spectrogram y = zero_spectrogram(disc);
    for (Eigen::Index i = 0; i < y.p.size(); ++i) y.p.data()[i] = gauss(rng);
    const double lhs = inner(op.apply(rho), y);
    const double rhs = inner(rho, op.adjoint(y)).real();
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
  }
  return {worst <= 1e-10, "max relative gap " + fmt("%.2e", worst)};
}

Outcome physical_invariants() {
  const CouplingConfig cfg{1.0};
  const Discretization disc(8, cfg);
  std::vector<DensityMatrix> states;
  for (int k0 : {0, 1, 2, 4}) states.push_back(make_band_limited(8, k0, 10 + k0));
  for (double mu : {0.25, 0.5, 1.0}) {
    states.push_back(make_decaying(8, PriorKind::polynomial, mu, 20).first);
  }
  for (double b : {0.3, 0.5, 0.8}) {
    states.push_back(make_decaying(8, PriorKind::exponential, b, 30).first);
  }
  states.push_back(make_pinem_state(8, Complex(0.7, 0.2), 0.4));
  for (int s = 0; s < 5; ++s) states.push_back(make_random_density(8, 40 + s, s % 3));
  double min_value = 1e300;
  double trace_gap = 0.0;
  for (const auto& rho : states) {
    const auto y = apply_factorized(rho, cfg, disc);
    min_value = std::min(min_value, y.p.minCoeff());
    for (int j = 0; j < y.p.cols(); ++j) {
      trace_gap = std::max(trace_gap, std::abs(y.p.col(j).sum() - 1.0));
    }
  }
  const double trace_tol = disc.tail_tol();
  return {min_value >= -1e-10 && trace_gap <= trace_tol,
          std::to_string(states.size()) + " states, min value " + fmt("%.2e", min_value) +
              ", max trace gap " + fmt("%.2e", trace_gap) + " (tol " + fmt("%.0e", trace_tol) +
              ")"};
}

Outcome sup_norm_bound() {
  const CouplingConfig cfg{1.0};
  const Discretization disc(8, cfg);
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const auto rho = make_random_density(8, 500 + s, s % 4);
    worst = std::max(worst, fourier_1(shift_G(rho.matrix()), disc).f.cwiseAbs().maxCoeff());
  }
  const double bound = 1.0 / kSqrtTwoPi + 1e-12;
  return {worst <= bound, "max " + fmt("%.12f", worst) + " vs " + fmt("%.12f", bound)};
}

Outcome sublevel_asymptotics() {
  const CouplingConfig cfg{1.0};
  const std::vector<double> eps = log_grid(1e-8, 1e-4, 2);
  std::string detail = "slopes";
  bool ok = true;
  for (int k : {1, 2, 3}) {
    const SublevelGeometry geo(cfg, k);
    std::vector<double> central;
    for (double e : eps) central.push_back(geo.central_component(e));
    const double s = log_log_slope(eps, central);
    ok = ok && std::abs(s - 1.0 / k) <= 0.1 / k;
    detail += " " + fmt("%.4f", s);
  }

  // C_I from k <= 3 over the full epsilon range, then frozen for every k <= 16.
  const std::vector<double> wide = log_grid(1e-8, 1.0, 4);
  const double c_lin = 2.0;
  std::vector<SublevelGeometry> geos;
  for (int k = 1; k <= 16; ++k) geos.emplace_back(cfg, k);
  double c_i = 0.0;
  for (int k = 1; k <= 3; ++k) {
    for (double e : wide) {
      const double env = k * std::pow(e, 1.0 / k);
      if (env < kTwoPi) c_i = std::max(c_i, (geos[k - 1].measure(e) - c_lin * e) / env);
    }
  }
  double worst = 0.0;
  for (int k = 1; k <= 16; ++k) {
    for (double e : wide) {
      const double bound = std::min(c_i * k * std::pow(e, 1.0 / k), kTwoPi) + c_lin * e;
      worst = std::max(worst, geos[k - 1].measure(e) / bound);
    }
  }
  ok = ok && worst <= 1.0 + 1e-12;
  detail += "; C_I " + fmt("%.4f", c_i) + " fitted on k <= 3, worst ratio over k <= 16 " +
            fmt("%.4f", worst);
  return {ok, detail};
}

Outcome ill_posedness() {
  const CouplingConfig cfg{1.0};
  std::vector<double> mins;
  double worst_norm_gap = 0.0;
  for (int n : {4, 6, 8}) {
    const Discretization disc(n, cfg);
    const auto sp = singular_spectrum(cfg, disc, 1);
    mins.push_back(sp.smallest[0]);
    const double est = operator_norm_estimate(cfg, disc);
    worst_norm_gap = std::max(worst_norm_gap, std::abs(sp.largest[0] / est - 1.0));
  }
  const bool ok = mins[1] > 0.0 && mins[0] > mins[1] && mins[1] > mins[2] && worst_norm_gap <= 0.02;
  return {ok, "sigma_min " + fmt("%.3e", mins[0]) + ", " + fmt("%.3e", mins[1]) + ", " +
                  fmt("%.3e", mins[2]) + "; sigma_max vs norm estimate " +
                  fmt("%.2e", worst_norm_gap)};
}

Outcome projection_oracle() {
  std::mt19937_64 rng(8);
  double oracle_gap = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto h = oracle::random_hermitian(3, rng);
    oracle_gap = std::max(
        oracle_gap, (project_to_constraint(h).matrix() - oracle::projection_grid_search(h)).norm());
  }
  double idem = 0.0;
  double expansion = -1e300;
  for (int t = 0; t < 100; ++t) {
    const auto a = oracle::random_hermitian(7, rng);
    const auto b = oracle::random_hermitian(7, rng);
    const auto pa = project_to_constraint(a);
    const auto pb = project_to_constraint(b);
    idem = std::max(idem, (project_to_constraint(pa.matrix()).matrix() - pa.matrix()).norm());
    expansion = std::max(expansion, (pa.matrix() - pb.matrix()).norm() - (a - b).norm());
  }
  return {oracle_gap <= 1e-6 && idem <= 1e-12 && expansion <= 1e-12,
          "oracle gap " + fmt("%.2e", oracle_gap) + ", idempotence " + fmt("%.2e", idem) +
              ", max expansion " + fmt("%.2e", expansion)};
}

ExperimentConfig sweep_config(const char* prior) {
  ExperimentConfig cfg;
  cfg.prior = parse_prior(prior);
  return cfg;
}

SweepResult holder_sweep;

Outcome holder_rate() {
  holder_sweep = run_rate_sweep(sweep_config("band:1"));
  bool bracket = true;
  for (const auto& r : holder_sweep.runs) {
    bracket = bracket && r.ok && r.bracket_satisfied && r.residual >= r.delta &&
              r.residual <= 1.5 * r.delta;
  }
  const double target = 1.0 / 3.0 - 0.05;
  std::string errors;
  for (const auto& p : holder_sweep.points) errors += " " + fmt("%.3e", p.error);
  return {bracket && holder_sweep.slope >= target,
          "slope " + fmt("%.3f", holder_sweep.slope) + " (>= " + fmt("%.3f", target) + ")" +
              ", brackets " + (bracket ? "all satisfied" : "violated") + ", errors" + errors};
}

Outcome sub_holder() {
  bool ok = true;
  std::string detail;
  for (const char* prior : {"exp:0.5", "poly:0.5"}) {
    auto cfg = sweep_config(prior);
    cfg.deltas = {5e-2, 1e-2, 1e-3, 1e-4};
    const auto r = run_rate_sweep(cfg);
    double worst = 0.0;
    for (size_t i = 1; i < r.points.size(); ++i) {
      worst = std::max(worst, r.points[i].error / r.points[i].phi_theory);
    }
    ok = ok && r.below_curve && r.failures == 0;
    detail += std::string(detail.empty() ? "" : "; ") + prior + " max error/curve " +
              fmt("%.3f", worst);
  }
  return {ok, detail};
}

Outcome apriori_vs_discrepancy() {
  auto cfg = sweep_config("band:1");
  cfg.rule = AlphaRule::a_priori;
  const auto apriori = run_rate_sweep(cfg);
  double worst = 1.0;
  std::string ratios;
  for (size_t i = 0; i < apriori.points.size(); ++i) {
    const double q = apriori.points[i].error / holder_sweep.points.at(i).error;
    worst = std::max({worst, q, 1.0 / q});
    ratios += " " + fmt("%.2f", q);
  }
  return {worst <= 3.0, "a-priori/discrepancy error ratios" + ratios};
}

Outcome vsc_tables() {
  const CouplingConfig cfg{1.0};
  const Discretization disc(8, cfg);
  const auto rho = make_band_limited(8, 1, 7);
  VscOptions opts;
  opts.nu = 1.0 / 3.0;
  const auto cert = vsc_certificate(rho, PriorClass::band_limited(1), cfg, disc, opts);
  const double target = 1.0 / 2.0;
  const bool ok = cert.kappa_monotone && cert.kappa_decay < 1e-3 && cert.psi_monotone &&
                  cert.psi_concave && std::abs(cert.kappa_slope - target) <= 0.05;
  return {ok, "kappa slope " + fmt("%.4f", cert.kappa_slope) + ", kappa decay " +
                  fmt("%.1e", cert.kappa_decay) + ", psi exponent " +
                  fmt("%.4f", cert.fit.exponent) + ", gate passed for eps <= " +
                  fmt("%.0e", cert.eps_max)};
}

}  // namespace

int main() {
  criterion(1, "factorization equivalence", 30, factorization);
  criterion(2, "multiplier identity", 5, multiplier_identity);
  criterion(3, "adjoint exactness", 10, adjoint_exactness);
  criterion(4, "physical invariants", 0, physical_invariants);
  criterion(5, "sup-norm bound", 0, sup_norm_bound);
  criterion(6, "sublevel asymptotics", 0, sublevel_asymptotics);
  criterion(7, "injectivity and ill-posedness", 120, ill_posedness);
  criterion(8, "projection oracle", 0, projection_oracle);
  criterion(9, "Hölder rate", 300, holder_rate);
  criterion(10, "sub-Hölder overlays", 600, sub_holder);
  criterion(11, "a-priori vs discrepancy", 0, apriori_vs_discrepancy);
  criterion(12, "VSC tables", 0, vsc_tables);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
