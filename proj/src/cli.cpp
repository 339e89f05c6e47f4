#include "squirrels/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "squirrels/analysis.hpp"
#include "squirrels/errors.hpp"
#include "squirrels/experiments.hpp"
#include "squirrels/io.hpp"
#include "squirrels/multiplier.hpp"
#include "squirrels/solver.hpp"

namespace squirrels {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

MatrixFormat matrix_format_for(const std::string& path) {
  return fs::path(path).extension() == ".bin" ? MatrixFormat::binary : MatrixFormat::json;
}

/// Flags shared by simulate, rates and analyze. Unset flags fall back to the
/// --config file, then to the built-in defaults.
struct ConfigFlags {
  std::string config_path;
  std::string prior;
  int n = 0;
  int buffer = 0;
  int m_theta = 0;
  int m_phi = 0;
  double g = 0.0;
  std::vector<double> deltas;
  std::string rule;
  double tau = 0.0;
  double alpha = 0.0;
  double psi_c = 0.0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t state_seed = 0;
  double tol = 0.0;
  int max_iter = 0;
  std::string out;

  CLI::App* app = nullptr;

  void add_to(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", config_path, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    sub->add_option("--prior", prior, "band:K0, poly:MU or exp:B");
    sub->add_option("--n", n, "state window half width N");
    sub->add_option("--buffer", buffer, "output buffer B (negative: tail rule)");
    sub->add_option("--m-theta", m_theta, "theta grid size (0: automatic)");
    sub->add_option("--m-phi", m_phi, "phi grid size (0: automatic)");
    sub->add_option("--g", g, "coupling strength |g|");
    sub->add_option("--delta", deltas, "noise levels")->delimiter(',');
    sub->add_option("--rule", rule, "apriori, discrepancy or fixed");
    sub->add_option("--tau", tau, "discrepancy factor");
    sub->add_option("--alpha", alpha, "regularization parameter for the fixed rule");
    sub->add_option("--psi-c", psi_c, "index function constant for the a-priori rule");
    sub->add_option("--seed", seeds, "noise seeds")->delimiter(',');
    sub->add_option("--state-seed", state_seed, "seed of the true state");
    sub->add_option("--tol", tol, "solver tolerance");
    sub->add_option("--max-iter", max_iter, "solver iteration cap");
    sub->add_option("--out", out, "output directory");
  }

  bool given(const char* flag) const { return app->count(flag) > 0; }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    bool g_known = given("--g");
    if (!config_path.empty()) {
      const std::string text = read_file(config_path);
      cfg = decode_config_json(text, cfg);
      const json j = json::parse(text);
      g_known = g_known || j.contains("g");
    }
    if (!g_known) throw CLI::RequiredError("--g");
    try {
      if (given("--prior")) cfg.prior = parse_prior(prior);
      if (given("--rule")) cfg.rule = parse_rule(rule);
    } catch (const InvalidInput& e) {
      throw CLI::ValidationError(e.what());
    }
    if (given("--n")) cfg.n_half = n;
    if (given("--buffer")) cfg.buffer = buffer;
    if (given("--m-theta")) cfg.m_theta = m_theta;
    if (given("--m-phi")) cfg.m_phi = m_phi;
    if (given("--g")) cfg.g_abs = g;
    if (given("--delta")) cfg.deltas = deltas;
    if (given("--tau")) cfg.tau = tau;
    if (given("--alpha")) cfg.alpha = alpha;
    if (given("--psi-c")) cfg.psi_c = psi_c;
    if (given("--seed")) cfg.seeds = seeds;
    if (given("--state-seed")) cfg.state_seed = state_seed;
    if (given("--tol")) cfg.tol = tol;
    if (given("--max-iter")) cfg.max_iter = max_iter;
    if (given("--out")) cfg.output_dir = out;
    return cfg;
  }
};

struct ReconstructFlags {
  std::string input;
  double g = 0.0;
  double delta = 0.0;
  std::string rule = "discrepancy";
  std::string method = "apg";
  double alpha = 0.0;
  double tau = 1.5;
  std::string prior = "band:1";
  double psi_c = 1.0;
  double tol = 1e-8;
  int max_iter = 20000;
  std::string out;
  std::string report;
};

struct MultiplierFlags {
  double g = 0.0;
  int kmax = 4;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  int resolution = SublevelGeometry::kMinResolution;
  int phi_points = 256;
  std::string out;
};

struct AnalyzeExtra {
  double nu = 0.0;
  double eps_max = 1e-2;
  int singular = 0;
};

int run_simulate(const ConfigFlags& flags, std::ostream& out) {
  ExperimentConfig cfg = flags.resolve();
  if (cfg.output_dir.empty()) throw CLI::RequiredError("--out");
  const auto manifest = generate_dataset(cfg);
  out << "wrote " << manifest.entries.size() << " observations to " << cfg.output_dir << "\n";
  for (const auto& e : manifest.entries) {
    out << e.path << " delta=" << num(e.delta) << " seed=" << e.seed
        << " realized=" << num(e.realized_noise) << "\n";
  }
  return kExitOk;
}

int run_reconstruct(const ReconstructFlags& f, const CLI::App& sub, std::ostream& out) {
  AlphaRule rule;
  PriorClass prior;
  try {
    rule = parse_rule(f.rule);
    prior = parse_prior(f.prior);
  } catch (const InvalidInput& e) {
    throw CLI::ValidationError(e.what());
  }
  if (f.method != "apg" && f.method != "admm") {
    throw CLI::ValidationError("--method must be apg or admm");
  }
  if (rule == AlphaRule::fixed && sub.count("--alpha") == 0) throw CLI::RequiredError("--alpha");
  if (rule != AlphaRule::fixed && sub.count("--delta") == 0) throw CLI::RequiredError("--delta");

  const auto loaded = read_spectrogram(f.input);
  const CouplingConfig cfg{f.g};
  cfg.validate();
  if (std::abs(loaded.meta.g_abs - f.g) > 1e-12 * std::max(1.0, f.g)) {
    throw ConfigError("--g " + num(f.g) + " does not match the recorded coupling " +
                      num(loaded.meta.g_abs) + " of " + f.input);
  }
  const Discretization disc = loaded.meta.discretization();
  SolverOptions sopts;
  sopts.tol = f.tol;
  sopts.max_iter = f.max_iter;
  sopts.method = f.method == "admm" ? SolverMethod::admm : SolverMethod::apg;

  const TikhonovSolver solver(loaded.y, cfg, disc);
  std::optional<SolveReport> report;
  switch (rule) {
    case AlphaRule::fixed:
      report = solver.solve(f.alpha, sopts);
      break;
    case AlphaRule::a_priori: {
      const double alpha =
          choose_alpha_a_priori(IndexFunction::for_prior(prior, f.psi_c), f.delta);
      report = solver.solve(alpha, sopts);
      report->rule = AlphaRule::a_priori;
      break;
    }
    case AlphaRule::discrepancy: {
      DiscrepancyOptions dopts;
      dopts.tau = f.tau;
      dopts.solver = sopts;
      report = solve_discrepancy(solver, f.delta, dopts);
      break;
    }
  }
  const double tau = rule == AlphaRule::discrepancy ? f.tau : 0.0;
  const double delta = sub.count("--delta") ? f.delta : 0.0;
  if (!f.out.empty()) write_matrix(f.out, report->rho_hat.matrix(), matrix_format_for(f.out));
  const std::string text = encode_report_json(*report, delta, tau);
  if (!f.report.empty()) {
    write_file(f.report, text);
  } else {
    out << text;
  }
  return kExitOk;
}

int run_rates(const ConfigFlags& flags, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = flags.resolve();
  try {
    const auto result = run_rate_sweep(cfg);
    out << encode_rates_csv(result);
    err << "slope " << num(result.slope) << " (theory " << num(result.theory_exponent)
        << "), failures " << result.failures << "/" << result.runs.size() << "\n";
    return kExitOk;
  } catch (const SweepFailure& e) {
    for (const auto& r : e.runs()) {
      if (!r.ok) err << "delta=" << num(r.delta) << " seed=" << r.seed << ": " << r.message << "\n";
    }
    throw;
  }
}

int run_multiplier(const MultiplierFlags& f, std::ostream& out) {
  const CouplingConfig cfg{f.g};
  cfg.validate();
  if (f.kmax < 0) throw InvalidInput("--kmax must be nonnegative");
  if (f.phi_points < 2) throw InvalidInput("--phi-points must be at least 2");
  std::ostringstream samples;
  samples << "k,phi,abs_m,re_m,im_m\n";
  for (int k = -f.kmax; k <= f.kmax; ++k) {
    for (int j = 0; j < f.phi_points; ++j) {
      const double phi = -kPi + kTwoPi * j / f.phi_points;
      const Complex m = m_closed_form(phi, k, cfg);
      samples << k << ',' << num(phi) << ',' << num(std::abs(m)) << ',' << num(m.real()) << ','
              << num(m.imag()) << '\n';
    }
  }
  std::ostringstream measures;
  measures << "k,epsilon,measure\n";
  for (int k = -f.kmax; k <= f.kmax; ++k) {
    const SublevelGeometry geom(cfg, k, f.resolution);
    for (double eps : f.epsilons) {
      if (!(eps > 0.0)) throw InvalidInput("--epsilons must be positive");
      measures << k << ',' << num(eps) << ',' << num(geom.measure(eps)) << '\n';
    }
  }
  if (f.out.empty()) {
    out << samples.str() << "\n" << measures.str();
  } else {
    fs::create_directories(f.out);
    write_file(join(f.out, "multiplier.csv"), samples.str());
    write_file(join(f.out, "sublevel.csv"), measures.str());
    out << "wrote " << join(f.out, "multiplier.csv") << " and " << join(f.out, "sublevel.csv")
        << "\n";
  }
  return kExitOk;
}

int run_analyze(const ConfigFlags& flags, const AnalyzeExtra& extra, std::ostream& out) {
  const ExperimentConfig cfg = flags.resolve();
  cfg.validate();
  const auto truth = make_true_state(cfg);
  const auto coupling = cfg.coupling();
  const auto disc = cfg.discretization();
  VscOptions opts;
  opts.nu = extra.nu;
  opts.eps_max = extra.eps_max;
  const auto cert = vsc_certificate(truth.rho, truth.prior, coupling, disc, opts);

  json j;
  j["prior"] = format_prior(cfg.prior);
  j["n"] = cfg.n_half;
  j["g"] = cfg.g_abs;
  j["state_seed"] = cfg.state_seed;
  j["nu"] = cert.nu;
  j["eps_max"] = cert.eps_max;
  j["kappa_monotone"] = cert.kappa_monotone;
  j["kappa_decay"] = cert.kappa_decay;
  j["kappa_slope"] = cert.kappa_slope;
  j["psi_monotone"] = cert.psi_monotone;
  j["psi_concave"] = cert.psi_concave;
  j["fit"] = {{"exponent", cert.fit.exponent},
              {"c", cert.fit.c},
              {"c_envelope", cert.fit.c_envelope},
              {"tau_lo", cert.fit.tau_lo},
              {"tau_hi", cert.fit.tau_hi}};
  j["epsilons"] = cert.epsilons;
  j["kappa"] = cert.kappa;
  j["sigma"] = cert.sigma;
  j["taus"] = cert.taus;
  j["psi"] = cert.psi;
  if (extra.singular > 0) {
    const auto sp = singular_spectrum(coupling, disc, extra.singular);
    j["singular_largest"] = sp.largest;
    j["singular_smallest"] = sp.smallest;
  }

  std::ostringstream kappa_csv;
  kappa_csv << "epsilon,kappa,sigma\n";
  for (size_t i = 0; i < cert.epsilons.size(); ++i) {
    kappa_csv << num(cert.epsilons[i]) << ',' << num(cert.kappa[i]) << ',';
    if (i < cert.sigma.size()) kappa_csv << num(cert.sigma[i]);
    kappa_csv << '\n';
  }
  std::ostringstream psi_csv;
  psi_csv << "tau,psi\n";
  for (size_t i = 0; i < cert.taus.size(); ++i) {
    psi_csv << num(cert.taus[i]) << ',' << num(cert.psi[i]) << '\n';
  }

  if (cfg.output_dir.empty()) {
    out << j.dump(2) << "\n";
  } else {
    fs::create_directories(cfg.output_dir);
    write_file(join(cfg.output_dir, "certificate.json"), j.dump(2) + "\n");
    write_file(join(cfg.output_dir, "kappa.csv"), kappa_csv.str());
    write_file(join(cfg.output_dir, "psi.csv"), psi_csv.str());
    out << "exponent " << num(cert.fit.exponent) << " c " << num(cert.fit.c) << "\n";
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density-matrix reconstruction from electron energy spectrograms"};
  app.name(args.empty() ? "squirrels" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  ConfigFlags simulate_flags;
  auto* simulate = app.add_subcommand("simulate", "generate a true state and noisy spectrograms");
  simulate_flags.add_to(simulate);

  ReconstructFlags rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct a density matrix");
  reconstruct->add_option("--input", rec.input, "spectrogram file with its JSON sidecar")
      ->required()
      ->check(CLI::ExistingFile);
  reconstruct->add_option("--g", rec.g, "coupling strength |g|")->required();
  reconstruct->add_option("--delta", rec.delta, "asserted noise level");
  reconstruct->add_option("--rule", rec.rule, "apriori, discrepancy or fixed")->capture_default_str();
  reconstruct->add_option("--method", rec.method, "apg or admm")->capture_default_str();
  reconstruct->add_option("--alpha", rec.alpha, "regularization parameter for the fixed rule");
  reconstruct->add_option("--tau", rec.tau, "discrepancy factor")->capture_default_str();
  reconstruct->add_option("--prior", rec.prior, "prior for the a-priori rule")->capture_default_str();
  reconstruct->add_option("--psi-c", rec.psi_c, "index function constant")->capture_default_str();
  reconstruct->add_option("--tol", rec.tol, "solver tolerance")->capture_default_str();
  reconstruct->add_option("--max-iter", rec.max_iter, "solver iteration cap")->capture_default_str();
  reconstruct->add_option("--out", rec.out, "output matrix file (.json or .bin)");
  reconstruct->add_option("--report", rec.report, "solve report JSON file (default: stdout)");

  ConfigFlags rates_flags;
  auto* rates = app.add_subcommand("rates", "reconstruction error sweep over noise levels");
  rates_flags.add_to(rates);

  MultiplierFlags mul;
  auto* multiplier = app.add_subcommand("multiplier", "multiplier samples and sublevel measures");
  multiplier->add_option("--g", mul.g, "coupling strength |g|")->required();
  multiplier->add_option("--kmax", mul.kmax, "largest offset |k|")->capture_default_str();
  multiplier->add_option("--epsilons", mul.epsilons, "sublevel thresholds")->delimiter(',');
  multiplier->add_option("--resolution", mul.resolution, "phi samples for sublevel sets")->capture_default_str()
      ->check(CLI::Range(SublevelGeometry::kMinResolution, 100000000));
  multiplier->add_option("--phi-points", mul.phi_points, "phi samples per offset")->capture_default_str();
  multiplier->add_option("--out", mul.out, "output directory (default: stdout)");

  ConfigFlags analyze_flags;
  AnalyzeExtra extra;
  auto* analyze = app.add_subcommand("analyze", "variational source condition certificate");
  analyze_flags.add_to(analyze);
  analyze->add_option("--nu", extra.nu, "sigma exponent (0: prior default)");
  analyze->add_option("--eps-max", extra.eps_max, "largest epsilon of the index set")->capture_default_str();
  analyze->add_option("--singular", extra.singular, "number of extreme singular values");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();

  CLI::App* active = &app;
  try {
    app.parse(reversed);
    for (auto* sub : {simulate, reconstruct, rates, multiplier, analyze}) {
      if (sub->parsed()) active = sub;
    }
    if (simulate->parsed()) return run_simulate(simulate_flags, out);
    if (reconstruct->parsed()) return run_reconstruct(rec, *reconstruct, out);
    if (rates->parsed()) return run_rates(rates_flags, out, err);
    if (multiplier->parsed()) return run_multiplier(mul, out);
    if (analyze->parsed()) return run_analyze(analyze_flags, extra, out);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    for (auto* sub : {simulate, reconstruct, rates, multiplier, analyze}) {
      if (sub->parsed()) active = sub;
    }
    out << active->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    for (auto* sub : {simulate, reconstruct, rates, multiplier, analyze}) {
      if (sub->parsed()) active = sub;
    }
    err << "error: " << e.what() << "\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace squirrels
