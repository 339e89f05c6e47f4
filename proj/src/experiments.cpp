#include "squirrels/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "squirrels/analysis.hpp"
#include "squirrels/errors.hpp"
#include "squirrels/forward.hpp"
#include "squirrels/index_function.hpp"
#include "squirrels/parallel.hpp"

namespace squirrels {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kMaxFailureRate = 0.2;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

PriorClass parse_prior(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InvalidInput("prior must look like band:K0, poly:MU or exp:B, got '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  const std::string value = text.substr(colon + 1);
  PriorClass prior;
  try {
    size_t used = 0;
    if (kind == "band") {
      const int k0 = std::stoi(value, &used);
      prior = PriorClass::band_limited(k0);
    } else if (kind == "poly") {
      prior = PriorClass::polynomial(std::stod(value, &used));
    } else if (kind == "exp") {
      prior = PriorClass::exponential(std::stod(value, &used));
    } else {
      throw InvalidInput("unknown prior kind '" + kind + "'");
    }
    if (used != value.size()) throw InvalidInput("trailing characters in prior '" + text + "'");
  } catch (const std::logic_error&) {
    throw InvalidInput("invalid prior parameter in '" + text + "'");
  }
  prior.validate();
  return prior;
}

std::string format_prior(const PriorClass& prior) {
  switch (prior.kind) {
    case PriorKind::band_limited:
      return "band:" + std::to_string(prior.k0);
    case PriorKind::polynomial:
      return "poly:" + num(prior.mu);
    case PriorKind::exponential:
      return "exp:" + num(prior.b);
  }
  return "";
}

AlphaRule parse_rule(const std::string& text) {
  if (text == "apriori") return AlphaRule::a_priori;
  if (text == "discrepancy") return AlphaRule::discrepancy;
  if (text == "fixed") return AlphaRule::fixed;
  throw InvalidInput("rule must be apriori, discrepancy or fixed, got '" + text + "'");
}

void ExperimentConfig::validate() const {
  prior.validate();
  coupling().validate();
  if (n_half < 1) throw ConfigError("N must be >= 1");
  if (deltas.empty()) throw ConfigError("at least one delta is required");
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("deltas must lie in [0, 1], got " + num(d));
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(tau > 1.0)) throw ConfigError("tau must exceed 1");
  if (!(tol > 0.0) || max_iter < 1) throw ConfigError("invalid solver tolerances");
  if (!(psi_c > 0.0)) throw ConfigError("psi constant must be positive");
  if (rule == AlphaRule::fixed && !(alpha > 0.0)) throw ConfigError("fixed rule needs alpha > 0");
}

void ExperimentConfig::validate_for_sweep() const {
  validate();
  std::vector<double> pos;
  for (double d : deltas) {
    if (d > 0.0) pos.push_back(d);
  }
  if (pos.size() < 3) throw ConfigError("a rate sweep needs at least 3 positive deltas");
  const auto [lo, hi] = std::minmax_element(pos.begin(), pos.end());
  if (*hi / *lo < 100.0 * (1.0 - 1e-12)) throw ConfigError("sweep deltas must span >= 2 decades");
}

Discretization ExperimentConfig::discretization() const {
  Discretization::Options opts;
  opts.buffer = buffer;
  opts.m_theta = m_theta;
  opts.m_phi = m_phi;
  return Discretization(n_half, coupling(), opts);
}

std::string encode_config_json(const ExperimentConfig& cfg) {
  json j;
  j["prior"] = format_prior(cfg.prior);
  j["n"] = cfg.n_half;
  j["buffer"] = cfg.buffer;
  j["m_theta"] = cfg.m_theta;
  j["m_phi"] = cfg.m_phi;
  j["g"] = cfg.g_abs;
  j["deltas"] = cfg.deltas;
  j["rule"] = to_string(cfg.rule);
  j["tau"] = cfg.tau;
  j["alpha"] = cfg.alpha;
  j["psi_c"] = cfg.psi_c;
  j["seeds"] = cfg.seeds;
  j["state_seed"] = cfg.state_seed;
  j["tol"] = cfg.tol;
  j["max_iter"] = cfg.max_iter;
  j["out"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

ExperimentConfig decode_config_json(const std::string& text, ExperimentConfig cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  static const std::vector<std::string> known{"prior", "n",   "buffer", "m_theta",    "m_phi",
                                              "g",     "deltas", "rule", "tau",       "alpha",
                                              "psi_c", "seeds", "state_seed", "tol", "max_iter",
                                              "out"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidInput("unknown config key '" + key + "'");
    }
  }
  try {
    if (j.contains("prior")) cfg.prior = parse_prior(j["prior"].get<std::string>());
    if (j.contains("n")) cfg.n_half = j["n"].get<int>();
    if (j.contains("buffer")) cfg.buffer = j["buffer"].get<int>();
    if (j.contains("m_theta")) cfg.m_theta = j["m_theta"].get<int>();
    if (j.contains("m_phi")) cfg.m_phi = j["m_phi"].get<int>();
    if (j.contains("g")) cfg.g_abs = j["g"].get<double>();
    if (j.contains("deltas")) cfg.deltas = j["deltas"].get<std::vector<double>>();
    if (j.contains("rule")) cfg.rule = parse_rule(j["rule"].get<std::string>());
    if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("psi_c")) cfg.psi_c = j["psi_c"].get<double>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("state_seed")) cfg.state_seed = j["state_seed"].get<std::uint64_t>();
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<int>();
    if (j.contains("out")) cfg.output_dir = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config value has the wrong type: ") + e.what());
  }
  return cfg;
}

Spectrogram NoiseModel::apply(const Spectrogram& clean) const {
  if (!(delta >= 0.0)) throw InvalidInput("noise level must be nonnegative");
  Spectrogram out = clean;
  if (delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Spectrogram noise = clean;
  for (Eigen::Index i = 0; i < noise.p.size(); ++i) noise.p.data()[i] = gauss(rng);
  noise.p *= kSafety * delta / norm(noise);
  out.p += noise.p;
  return out;
}

TrueState make_true_state(const ExperimentConfig& cfg) {
  if (cfg.prior.kind == PriorKind::band_limited) {
    return {make_band_limited(cfg.n_half, cfg.prior.k0, cfg.state_seed), cfg.prior};
  }
  const double param = cfg.prior.kind == PriorKind::polynomial ? cfg.prior.mu : cfg.prior.b;
  auto [rho, prior] = make_decaying(cfg.n_half, cfg.prior.kind, param, cfg.state_seed);
  return {std::move(rho), prior};
}

Spectrogram make_observation(const ExperimentConfig& cfg, const TrueState& truth, double delta,
                             std::uint64_t seed) {
  const Spectrogram clean = apply_factorized(truth.rho, cfg.coupling(), cfg.discretization());
  return NoiseModel{delta, seed}.apply(clean);
}

DatasetManifest generate_dataset(const ExperimentConfig& cfg, SpectrogramFormat format) {
  cfg.validate();
  if (cfg.output_dir.empty()) throw ConfigError("generate_dataset needs an output directory");
  const auto disc = cfg.discretization();
  const auto coupling = cfg.coupling();
  const TrueState truth = make_true_state(cfg);
  const Spectrogram clean = apply_factorized(truth.rho, coupling, disc);
  const std::string ext = format == SpectrogramFormat::csv ? ".csv" : ".bin";

  DatasetManifest manifest;
  manifest.rho_path = join(cfg.output_dir, "rho_true.json");
  write_matrix(manifest.rho_path, truth.rho.matrix(), MatrixFormat::json);
  manifest.clean_path = join(cfg.output_dir, "y_clean" + ext);
  auto meta = SpectrogramMeta::from(disc, coupling);
  write_spectrogram(manifest.clean_path, clean, meta, format);

  for (size_t i = 0; i < cfg.deltas.size(); ++i) {
    for (auto seed : cfg.seeds) {
      DatasetEntry e;
      e.delta = cfg.deltas[i];
      e.seed = seed;
      e.path = join(cfg.output_dir,
                    "y_obs_d" + std::to_string(i) + "_s" + std::to_string(seed) + ext);
      const Spectrogram y = NoiseModel{e.delta, seed}.apply(clean);
      Spectrogram diff = y;
      diff.p -= clean.p;
      e.realized_noise = norm(diff);
      meta.noise_level = e.delta;
      meta.realized_noise = e.realized_noise;
      meta.seed = seed;
      write_spectrogram(e.path, y, meta, format);
      manifest.entries.push_back(e);
    }
  }

  json j;
  j["config"] = json::parse(encode_config_json(cfg));
  j["config"].erase("out");
  j["prior"] = {{"kind", to_string(truth.prior.kind)},
                {"k0", truth.prior.k0},
                {"mu", truth.prior.mu},
                {"b", truth.prior.b},
                {"c_rho", truth.prior.c_rho}};
  j["rho_true"] = fs::path(manifest.rho_path).filename().string();
  j["y_clean"] = fs::path(manifest.clean_path).filename().string();
  j["observations"] = json::array();
  for (const auto& e : manifest.entries) {
    j["observations"].push_back({{"delta", e.delta},
                                 {"seed", e.seed},
                                 {"file", fs::path(e.path).filename().string()},
                                 {"realized_noise", e.realized_noise}});
  }
  write_file(join(cfg.output_dir, "manifest.json"), j.dump(2) + "\n");
  return manifest;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of an empty sample");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SweepResult run_rate_sweep(const ExperimentConfig& cfg) {
  cfg.validate_for_sweep();
  const auto coupling = cfg.coupling();
  const auto disc = cfg.discretization();
  const TrueState truth = make_true_state(cfg);
  const Spectrogram clean = apply_factorized(truth.rho, coupling, disc);
  const IndexFunction psi = IndexFunction::for_prior(truth.prior, cfg.psi_c);

  std::vector<double> deltas;
  for (double d : cfg.deltas) {
    if (d > 0.0) deltas.push_back(d);
  }
  std::sort(deltas.begin(), deltas.end(), std::greater<>());

  SweepResult result;
  for (double d : deltas) {
    for (auto seed : cfg.seeds) result.runs.push_back(SweepRun{d, seed});
  }

  parallel_for(static_cast<int>(result.runs.size()), [&](int i) {
    SweepRun& run = result.runs[i];
    try {
      const Spectrogram y = NoiseModel{run.delta, run.seed}.apply(clean);
      const TikhonovSolver solver(y, coupling, disc);
      SolverOptions sopts;
      sopts.tol = cfg.tol;
      sopts.max_iter = cfg.max_iter;
      auto solve = [&]() -> SolveReport {
        switch (cfg.rule) {
          case AlphaRule::discrepancy: {
            DiscrepancyOptions dopts;
            dopts.tau = cfg.tau;
            dopts.solver = sopts;
            return solve_discrepancy(solver, run.delta, dopts);
          }
          case AlphaRule::a_priori: {
            SolveReport r = solver.solve(choose_alpha_a_priori(psi, run.delta), sopts);
            r.rule = AlphaRule::a_priori;
            return r;
          }
          case AlphaRule::fixed:
            break;
        }
        return solver.solve(cfg.alpha, sopts);
      };
      const SolveReport rep = solve();
      run.error = (rep.rho_hat.matrix() - truth.rho.matrix()).norm();
      run.residual = rep.residual_norm;
      run.alpha = rep.alpha_used;
      run.iterations = rep.iterations;
      run.bracket_satisfied = rep.bracket_satisfied;
      run.ok = cfg.rule != AlphaRule::discrepancy || rep.bracket_satisfied;
      run.message = run.ok ? "" : rep.diagnostic;
    } catch (const Error& e) {
      run.ok = false;
      run.message = e.what();
    }
  });

  for (const auto& run : result.runs) result.failures += run.ok ? 0 : 1;
  if (result.failures > kMaxFailureRate * static_cast<double>(result.runs.size())) {
    throw SweepFailure(std::to_string(result.failures) + " of " +
                           std::to_string(result.runs.size()) + " reconstructions failed",
                       result.runs);
  }

  result.all_brackets = true;
  for (double d : deltas) {
    SweepPoint p;
    p.delta = d;
    std::vector<double> err, res, alpha;
    for (const auto& run : result.runs) {
      if (run.delta != d) continue;
      if (cfg.rule == AlphaRule::discrepancy && !run.bracket_satisfied) result.all_brackets = false;
      if (!run.ok) continue;
      err.push_back(run.error);
      res.push_back(run.residual);
      alpha.push_back(run.alpha);
    }
    p.successes = static_cast<int>(err.size());
    if (!err.empty()) {
      p.error = median(err);
      p.residual = median(res);
      p.alpha = median(alpha);
    }
    result.points.push_back(p);
  }
  if (cfg.rule != AlphaRule::discrepancy) result.all_brackets = false;

  // Calibrate Phi at the largest delta, verify and fit on the rest.
  const RateFunction shape(truth.prior, 1.0);
  const double factor = 2.0 * (1.0 + cfg.tau);
  const SweepPoint& top = result.points.front();
  if (top.successes == 0) throw SweepFailure("calibration point failed", result.runs);
  result.calibration_c = top.error / (factor * shape(top.delta));
  const RateFunction phi(truth.prior, result.calibration_c);
  result.below_curve = true;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < result.points.size(); ++i) {
    auto& p = result.points[i];
    p.phi_theory = factor * phi(p.delta);
    if (i == 0 || p.successes == 0) continue;
    p.below_curve = p.error <= p.phi_theory;
    result.below_curve = result.below_curve && p.below_curve;
    xs.push_back(p.delta);
    ys.push_back(p.error);
  }
  result.slope = xs.size() >= 2 ? log_log_slope(xs, ys) : std::nan("");
  result.theory_exponent =
      truth.prior.kind == PriorKind::band_limited ? 1.0 / (1.0 + 2.0 * truth.prior.k0) : 0.0;

  if (!cfg.output_dir.empty()) {
    write_file(join(cfg.output_dir, "rates.csv"), encode_rates_csv(result));
    write_file(join(cfg.output_dir, "runs.csv"), encode_runs_csv(result));
    write_file(join(cfg.output_dir, "summary.json"), encode_summary_json(cfg, result));
  }
  return result;
}

std::string encode_rates_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "delta,error,residual,alpha,phi_theory\n";
  for (const auto& p : result.points) {
    os << num(p.delta) << ',' << num(p.error) << ',' << num(p.residual) << ',' << num(p.alpha)
       << ',' << num(p.phi_theory) << '\n';
  }
  return os.str();
}

std::string encode_runs_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "delta,seed,ok,error,residual,alpha,iterations,bracket_satisfied\n";
  for (const auto& r : result.runs) {
    os << num(r.delta) << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << num(r.error) << ','
       << num(r.residual) << ',' << num(r.alpha) << ',' << r.iterations << ','
       << (r.bracket_satisfied ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string encode_summary_json(const ExperimentConfig& cfg, const SweepResult& result) {
  json j;
  j["config"] = json::parse(encode_config_json(cfg));
  j["slope"] = std::isfinite(result.slope) ? json(result.slope) : json(nullptr);
  j["theory_exponent"] = result.theory_exponent;
  j["calibration_c"] = result.calibration_c;
  j["failures"] = result.failures;
  j["runs"] = result.runs.size();
  j["all_brackets"] = result.all_brackets;
  j["below_curve"] = result.below_curve;
  j["points"] = json::array();
  for (const auto& p : result.points) {
    j["points"].push_back({{"delta", p.delta},
                           {"error", p.error},
                           {"residual", p.residual},
                           {"alpha", p.alpha},
                           {"phi_theory", p.phi_theory},
                           {"successes", p.successes},
                           {"below_curve", p.below_curve}});
  }
  j["failed_runs"] = json::array();
  for (const auto& r : result.runs) {
    if (!r.ok) j["failed_runs"].push_back({{"delta", r.delta}, {"seed", r.seed}, {"message", r.message}});
  }
  return j.dump(2) + "\n";
}

std::string encode_report_json(const SolveReport& report, double delta, double tau) {
  json j;
  j["rule"] = to_string(report.rule);
  j["delta"] = delta;
  j["tau"] = tau;
  j["alpha_used"] = report.alpha_used;
  j["residual_norm"] = report.residual_norm;
  j["objective"] = report.objective;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["fixed_point_residual"] = report.fixed_point_residual;
  j["bracket_satisfied"] = report.bracket_satisfied;
  j["diagnostic"] = report.diagnostic;
  j["n_half"] = report.rho_hat.n_half();
  j["alpha_trace"] = json::array();
  for (const auto& [a, r] : report.alpha_trace) {
    j["alpha_trace"].push_back({{"alpha", a}, {"residual", r}});
  }
  return j.dump(2) + "\n";
}

}  // namespace squirrels
