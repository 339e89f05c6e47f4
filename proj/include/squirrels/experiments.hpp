#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "squirrels/grids.hpp"
#include "squirrels/io.hpp"
#include "squirrels/solver.hpp"
#include "squirrels/states.hpp"

namespace squirrels {

/// "band:K0", "poly:MU" or "exp:B". Throws InvalidInput otherwise.
PriorClass parse_prior(const std::string& text);
std::string format_prior(const PriorClass& prior);
/// "apriori", "discrepancy" or "fixed".
AlphaRule parse_rule(const std::string& text);

struct ExperimentConfig {
  PriorClass prior = PriorClass::band_limited(1);
  int n_half = 8;
  int buffer = -1;
  int m_theta = 0;
  int m_phi = 0;
  double g_abs = 1.0;
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
  AlphaRule rule = AlphaRule::discrepancy;
  double tau = 1.5;
  double alpha = 0.0;  // fixed rule only
  double psi_c = 1.0;  // constant of the index function used by the a-priori rule
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint64_t state_seed = 7;
  double tol = 1e-8;
  int max_iter = 20000;
  std::string output_dir;

  /// Deltas in [0, 1], at least one seed, sizes and tolerances valid.
  void validate() const;
  /// Additionally: >= 3 positive deltas spanning >= 2 decades.
  void validate_for_sweep() const;

  CouplingConfig coupling() const { return {g_abs}; }
  Discretization discretization() const;
};

std::string encode_config_json(const ExperimentConfig& cfg);
/// Missing keys keep the values already in `base`.
ExperimentConfig decode_config_json(const std::string& text, ExperimentConfig base = {});

/// Additive white Gaussian noise on the spectrogram grid, rescaled so that its
/// quadrature norm is exactly 0.999 delta. delta = 0 leaves the data untouched.
struct NoiseModel {
  static constexpr double kSafety = 0.999;
  double delta = 0.0;
  std::uint64_t seed = 0;

  Spectrogram apply(const Spectrogram& clean) const;
};

/// True state of an experiment and its prior with the measured constant.
struct TrueState {
  DensityMatrix rho;
  PriorClass prior;
};

TrueState make_true_state(const ExperimentConfig& cfg);

struct DatasetEntry {
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string path;
  double realized_noise = 0.0;
};

struct DatasetManifest {
  std::string rho_path;
  std::string clean_path;
  std::vector<DatasetEntry> entries;
};

/// Writes rho_true.json, y_clean.csv and y_obs_d<i>_s<seed>.csv (each with a
/// JSON sidecar) plus manifest.json into cfg.output_dir.
DatasetManifest generate_dataset(const ExperimentConfig& cfg,
                                 SpectrogramFormat format = SpectrogramFormat::csv);

struct SweepRun {
  double delta = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string message;
  double error = 0.0;
  double residual = 0.0;
  double alpha = 0.0;
  int iterations = 0;
  bool bracket_satisfied = false;
};

struct SweepPoint {
  double delta = 0.0;
  double error = 0.0;     // median over successful seeds
  double residual = 0.0;  // median
  double alpha = 0.0;     // median
  double phi_theory = 0.0;  // calibrated 2 (1 + tau) Phi(delta)
  int successes = 0;
  bool below_curve = true;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<SweepPoint> points;  // descending delta
  double slope = 0.0;              // log-log error slope, calibration delta excluded
  double theory_exponent = 0.0;    // 1/(1 + 2 k0) for band-limited priors, else 0
  double calibration_c = 0.0;      // Phi constant matching the largest delta
  int failures = 0;
  bool all_brackets = false;
  bool below_curve = false;        // every non-calibration point below the curve
};

/// Failure rate above 20% of the (delta, seed) runs.
class SweepFailure : public Error {
 public:
  SweepFailure(const std::string& what, std::vector<SweepRun> runs)
      : Error(what), runs_(std::move(runs)) {}
  const std::vector<SweepRun>& runs() const noexcept { return runs_; }

 private:
  std::vector<SweepRun> runs_;
};

/// Noisy observation for one (delta, seed) pair, identical to the dataset files.
Spectrogram make_observation(const ExperimentConfig& cfg, const TrueState& truth, double delta,
                             std::uint64_t seed);

/// Reconstructs every (delta, seed) pair in parallel, takes medians over seeds,
/// calibrates Phi at the largest delta and fits the error slope on the rest.
/// Writes rates.csv, runs.csv and summary.json when cfg.output_dir is set.
SweepResult run_rate_sweep(const ExperimentConfig& cfg);

std::string encode_rates_csv(const SweepResult& result);
std::string encode_runs_csv(const SweepResult& result);
std::string encode_summary_json(const ExperimentConfig& cfg, const SweepResult& result);

/// SolveReport fields as JSON, plus the asserted delta and tau (0 when unused).
std::string encode_report_json(const SolveReport& report, double delta, double tau);

double median(std::vector<double> values);

}  // namespace squirrels
