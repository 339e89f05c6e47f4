#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "squirrels/errors.hpp"
#include "squirrels/forward.hpp"
#include "squirrels/index_function.hpp"
#include "squirrels/states.hpp"

namespace squirrels {

enum class AlphaRule { fixed, a_priori, discrepancy };
const char* to_string(AlphaRule rule);

/// min ||T rho - y_obs||^2 + alpha ||rho||_F^2 over density matrices.
struct TikhonovProblem {
  Spectrogram y_obs;
  CouplingConfig cfg;
  Discretization disc;
  double delta = 0.0;  // asserted noise level
  double alpha = 0.0;

  /// Throws InvalidInput unless delta > 0 and alpha > 0, ConfigError on grid mismatch.
  void validate() const;
};

/// admm: splitting x = z with exact block solves of (T^*T + c I) x = r and the
/// eigenprojection for z. apg: accelerated projected gradient with restart.
enum class SolverMethod { admm, apg };
const char* to_string(SolverMethod method);

struct SolverOptions {
  SolverMethod method = SolverMethod::apg;
  double tol = 1e-8;
  int max_iter = 20000;
  std::optional<ComplexMatrix> start;  // projected before use; default I/(2N+1)
  bool record_objective = false;
};

struct SolveReport {
  DensityMatrix rho_hat;
  double residual_norm = 0.0;
  double objective = 0.0;
  int iterations = 0;
  double alpha_used = 0.0;
  AlphaRule rule = AlphaRule::fixed;
  bool bracket_satisfied = false;
  bool converged = false;
  /// apg: ||z - y|| of the last step; admm: max of the primal and dual residuals.
  double fixed_point_residual = 0.0;
  std::vector<double> objective_trace;                  // accepted iterates
  std::vector<std::pair<double, double>> alpha_trace;   // (alpha, residual) evaluations
  std::string diagnostic;
};

/// max_iter reached with a fixed-point residual above 100 tol.
class NonConvergence : public ConvergenceError {
 public:
  NonConvergence(const std::string& what, ComplexMatrix last, double residual)
      : ConvergenceError(what), last_(std::move(last)), residual_(residual) {}
  const ComplexMatrix& last_iterate() const noexcept { return last_; }
  double fixed_point_residual() const noexcept { return residual_; }

 private:
  ComplexMatrix last_;
  double residual_;
};

/// The discrepancy bracket could not be reached inside the alpha range.
class BracketFailure : public Error {
 public:
  BracketFailure(const std::string& what, std::vector<std::pair<double, double>> curve)
      : Error(what), curve_(std::move(curve)) {}
  const std::vector<std::pair<double, double>>& residual_curve() const noexcept { return curve_; }

 private:
  std::vector<std::pair<double, double>> curve_;
};

/// Constrained Tikhonov functional on one data set. Precomputes T^* y, ||y||^2,
/// the eigendecomposed blocks of T^*T and ||T||; solves at different alpha reuse them.
class TikhonovSolver {
 public:
  TikhonovSolver(const Spectrogram& y_obs, const CouplingConfig& cfg, const Discretization& disc);

  const ForwardOperator& op() const noexcept { return op_; }
  double operator_norm() const noexcept { return norm_t_; }

  /// ||T rho - y_obs|| evaluated through the forward map.
  double residual(const ComplexMatrix& rho) const;
  double objective(const ComplexMatrix& rho, double alpha) const;
  /// 2 T^*(T rho - y) + 2 alpha rho.
  ComplexMatrix gradient(const ComplexMatrix& rho, double alpha) const;
  /// ||rho - P(rho - grad / L)||_F, zero exactly at the constrained minimizer.
  double optimality_residual(const ComplexMatrix& rho, double alpha) const;
  double lipschitz(double alpha) const { return 2.0 * (norm_t_ * norm_t_ + alpha); }
  /// (T^*T + shift I)^{-1} rhs, exact through the block eigendecompositions.
  ComplexMatrix solve_shifted(const ComplexMatrix& rhs, double shift) const;

  SolveReport solve(double alpha, const SolverOptions& opts = {}) const;

 private:
  SolveReport solve_apg(double alpha, const SolverOptions& opts) const;
  SolveReport solve_admm(double alpha, const SolverOptions& opts) const;
  SolveReport finish(const ComplexMatrix& x, double alpha, int iterations, bool converged,
                     double fp_res) const;

  Spectrogram y_;
  ForwardOperator op_;
  NormalOperator normal_;
  ComplexMatrix ty_;
  double y_sq_;
  double norm_t_;
  std::vector<ComplexMatrix> eigvecs_;       // per offset k + 2N
  std::vector<Eigen::VectorXd> eigvals_;
};

SolveReport solve_fixed_alpha(const TikhonovProblem& prob, double tol = 1e-8,
                              int max_iter = 20000);

/// alpha = 1 / psi'(4 delta^2). Throws InvalidInput when psi' <= 0.
double choose_alpha_a_priori(const IndexFunction& psi, double delta);

struct DiscrepancyOptions {
  double tau = 1.5;
  double alpha_min = 1e-14;
  double alpha_max = 1e3;
  int max_bisections = 60;
  SolverOptions solver;
};

/// Bisection on log alpha until delta <= ||T rho_alpha - y_obs|| <= tau delta.
/// If even alpha_min leaves the residual above tau delta, the alpha_min solution
/// is returned with bracket_satisfied = false and a diagnostic.
SolveReport solve_discrepancy(const TikhonovSolver& solver, double delta,
                              const DiscrepancyOptions& opts = {});
SolveReport solve_discrepancy(const Spectrogram& y_obs, const CouplingConfig& cfg,
                              const Discretization& disc, double delta,
                              const DiscrepancyOptions& opts = {});

struct ErrorBoundCheck {
  bool holds = false;
  double error = 0.0;  // ||rho_hat - rho_true||_F
  double bound = 0.0;  // 4 (1 + tau) sqrt(psi(delta^2))
  double ratio = 0.0;  // error / bound
};

ErrorBoundCheck error_bound_check(const SolveReport& report, const DensityMatrix& rho_true,
                                  const IndexFunction& psi, double delta, double tau);

}  // namespace squirrels
