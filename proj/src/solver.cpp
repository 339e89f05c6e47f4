#include "squirrels/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace squirrels {
namespace {

constexpr double kFixedPointSlack = 100.0;
constexpr int kPenaltyUpdateEvery = 10;
constexpr double kPenaltyBalance = 10.0;

int first_valid(int n_half, int k) { return std::max(-n_half, -n_half - k); }
int last_valid(int n_half, int k) { return std::min(n_half, n_half - k); }

ComplexMatrix project(const ComplexMatrix& h) { return project_to_constraint(h).matrix(); }

}  // namespace

const char* to_string(AlphaRule rule) {
  switch (rule) {
    case AlphaRule::fixed:
      return "fixed";
    case AlphaRule::a_priori:
      return "apriori";
    case AlphaRule::discrepancy:
      return "discrepancy";
  }
  return "unknown";
}

const char* to_string(SolverMethod method) {
  return method == SolverMethod::admm ? "admm" : "apg";
}

void TikhonovProblem::validate() const {
  if (!(delta > 0.0)) throw InvalidInput("noise level delta must be positive");
  if (!(alpha > 0.0)) throw InvalidInput("regularization parameter alpha must be positive");
  cfg.validate();
  if (y_obs.n_half != disc.n_half() || y_obs.buffer != disc.buffer() ||
      y_obs.p.rows() != disc.out_dim() || y_obs.p.cols() != disc.m_theta()) {
    throw ConfigError("observed spectrogram does not match the discretization");
  }
}

TikhonovSolver::TikhonovSolver(const Spectrogram& y_obs, const CouplingConfig& cfg,
                               const Discretization& disc)
    : y_(y_obs), op_(cfg, disc), normal_(op_) {
  if (y_obs.n_half != disc.n_half() || y_obs.buffer != disc.buffer() ||
      y_obs.p.rows() != disc.out_dim() || y_obs.p.cols() != disc.m_theta()) {
    throw ConfigError("observed spectrogram does not match the discretization");
  }
  ty_ = op_.adjoint(y_);
  y_sq_ = inner(y_, y_);
  norm_t_ = operator_norm_estimate(op_);
  const int n = disc.n_half();
  for (int k = -2 * n; k <= 2 * n; ++k) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(normal_.block(k));
    eigvecs_.push_back(es.eigenvectors());
    eigvals_.push_back(es.eigenvalues());
  }
}

ComplexMatrix TikhonovSolver::solve_shifted(const ComplexMatrix& rhs, double shift) const {
  const int n = op_.disc().n_half();
  const int d = 2 * n + 1;
  if (rhs.rows() != d || rhs.cols() != d) throw ConfigError("solve_shifted: window mismatch");
  if (!(shift > 0.0)) throw InvalidInput("solve_shifted: shift must be positive");
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  Eigen::VectorXcd v;
  for (int k = -2 * n; k <= 2 * n; ++k) {
    const int lo = first_valid(n, k);
    const int count = last_valid(n, k) - lo + 1;
    v.resize(count);
    for (int i = 0; i < count; ++i) v(i) = rhs(lo + i + k + n, lo + i + n);
    const ComplexMatrix& vk = eigvecs_[k + 2 * n];
    Eigen::VectorXcd w = vk.adjoint() * v;
    w.array() /= (eigvals_[k + 2 * n].array() + shift);
    v = vk * w;
    for (int i = 0; i < count; ++i) out(lo + i + k + n, lo + i + n) = v(i);
  }
  return out;
}

double TikhonovSolver::residual(const ComplexMatrix& rho) const {
  Spectrogram r = op_.apply(rho);
  r.p -= y_.p;
  return norm(r);
}

double TikhonovSolver::objective(const ComplexMatrix& rho, double alpha) const {
  const double r = residual(rho);
  return r * r + alpha * rho.squaredNorm();
}

ComplexMatrix TikhonovSolver::gradient(const ComplexMatrix& rho, double alpha) const {
  return 2.0 * (normal_.apply(rho) - ty_) + 2.0 * alpha * rho;
}

double TikhonovSolver::optimality_residual(const ComplexMatrix& rho, double alpha) const {
  const ComplexMatrix z = project(rho - gradient(rho, alpha) / lipschitz(alpha));
  return (z - rho).norm();
}

SolveReport TikhonovSolver::solve(double alpha, const SolverOptions& opts) const {
  if (!(alpha > 0.0)) throw InvalidInput("regularization parameter alpha must be positive");
  if (!(opts.tol > 0.0) || opts.max_iter < 1) throw InvalidInput("invalid solver tolerances");
  return opts.method == SolverMethod::admm ? solve_admm(alpha, opts) : solve_apg(alpha, opts);
}

SolveReport TikhonovSolver::finish(const ComplexMatrix& x, double alpha, int iterations,
                                   bool converged, double fp_res) const {
  SolveReport report{project_to_constraint(x)};
  report.residual_norm = residual(report.rho_hat.matrix());
  report.objective = report.residual_norm * report.residual_norm +
                     alpha * report.rho_hat.matrix().squaredNorm();
  report.iterations = iterations;
  report.alpha_used = alpha;
  report.rule = AlphaRule::fixed;
  report.converged = converged;
  report.fixed_point_residual = fp_res;
  return report;
}

SolveReport TikhonovSolver::solve_admm(double alpha, const SolverOptions& opts) const {
  const int d = op_.disc().dim();
  ComplexMatrix z = opts.start ? project(*opts.start)
                               : ComplexMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  double penalty = 1.0;
  std::vector<double> trace;
  if (opts.record_objective) trace.push_back(objective(z, alpha));

  double primal = 0.0;
  double dual = 0.0;
  int it = 0;
  bool converged = false;
  while (it < opts.max_iter) {
    ++it;
    // x = argmin ||Tx - y||^2 + alpha ||x||^2 + (penalty / 2) ||x - (z - u)||^2.
    ComplexMatrix x = solve_shifted(ty_ + 0.5 * penalty * (z - u), alpha + 0.5 * penalty);
    x = (0.5 * (x + x.adjoint())).eval();
    const ComplexMatrix z_prev = z;
    z = project(x + u);
    u += x - z;
    primal = (x - z).norm();
    dual = penalty * (z - z_prev).norm();
    if (opts.record_objective) trace.push_back(objective(z, alpha));
    if (primal <= opts.tol && dual <= opts.tol) {
      converged = true;
      break;
    }
    if (it % kPenaltyUpdateEvery == 0) {
      if (primal > kPenaltyBalance * dual) {
        penalty *= 2.0;
        u /= 2.0;
      } else if (dual > kPenaltyBalance * primal) {
        penalty /= 2.0;
        u *= 2.0;
      }
    }
  }
  const double fp_res = std::max(primal, dual);
  if (!converged && fp_res > kFixedPointSlack * opts.tol) {
    std::ostringstream os;
    os << "ADMM did not converge in " << opts.max_iter << " iterations (primal " << primal
       << ", dual " << dual << ")";
    throw NonConvergence(os.str(), z, fp_res);
  }
  SolveReport report = finish(z, alpha, it, converged, fp_res);
  report.objective_trace = std::move(trace);
  return report;
}

SolveReport TikhonovSolver::solve_apg(double alpha, const SolverOptions& opts) const {
  const int d = op_.disc().dim();
  const double step = 1.0 / lipschitz(alpha);

  // Quadratic pieces through the normal operator: F = <x, Ax> - 2<x, T^*y> + ||y||^2 + alpha ||x||^2.
  auto objective_from = [&](const ComplexMatrix& x, const ComplexMatrix& ax) {
    return inner(x, ax).real() - 2.0 * inner(x, ty_).real() + y_sq_ + alpha * x.squaredNorm();
  };

  ComplexMatrix x = opts.start ? project(*opts.start)
                               : ComplexMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  ComplexMatrix ax = normal_.apply(x);
  double fx = objective_from(x, ax);
  ComplexMatrix y = x;
  ComplexMatrix ay = ax;
  double t = 1.0;

  std::vector<double> trace;
  if (opts.record_objective) trace.push_back(fx);

  double fp_res = 0.0;
  int it = 0;
  bool converged = false;
  while (it < opts.max_iter) {
    ++it;
    const ComplexMatrix grad = 2.0 * (ay - ty_) + 2.0 * alpha * y;
    const ComplexMatrix z = project(y - step * grad);
    fp_res = (z - y).norm();
    const ComplexMatrix az = normal_.apply(z);
    const double fz = objective_from(z, az);
    const bool done = fp_res < opts.tol * std::max(1.0, y.norm());

    if (fz <= fx) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      y = z + beta * (z - x);
      ay = az + beta * (az - ax);
      x = z;
      ax = az;
      fx = fz;
      t = t_next;
      if (opts.record_objective) trace.push_back(fx);
    } else {
      // Restart from the best iterate without momentum.
      y = x;
      ay = ax;
      t = 1.0;
    }
    if (done) {
      converged = true;
      break;
    }
  }

  if (!converged && fp_res > kFixedPointSlack * opts.tol) {
    std::ostringstream os;
    os << "projected gradient did not converge in " << opts.max_iter
       << " iterations (fixed-point residual " << fp_res << ")";
    throw NonConvergence(os.str(), x, fp_res);
  }

  SolveReport report = finish(x, alpha, it, converged, fp_res);
  report.objective_trace = std::move(trace);
  return report;
}

SolveReport solve_fixed_alpha(const TikhonovProblem& prob, double tol, int max_iter) {
  prob.validate();
  const TikhonovSolver solver(prob.y_obs, prob.cfg, prob.disc);
  SolverOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.record_objective = true;
  return solver.solve(prob.alpha, opts);
}

double choose_alpha_a_priori(const IndexFunction& psi, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("choose_alpha_a_priori: delta must be positive");
  const double slope = psi.derivative(4.0 * delta * delta);
  if (!(slope > 0.0)) {
    throw InvalidInput("invalid index function: derivative " + std::to_string(slope) +
                       " is not positive");
  }
  return 1.0 / slope;
}

SolveReport solve_discrepancy(const TikhonovSolver& solver, double delta,
                              const DiscrepancyOptions& opts) {
  if (!(delta > 0.0)) throw InvalidInput("solve_discrepancy: delta must be positive");
  if (!(opts.tau > 1.0)) throw InvalidInput("solve_discrepancy: tau must exceed 1");
  if (!(opts.alpha_min > 0.0 && opts.alpha_min < opts.alpha_max)) {
    throw InvalidInput("solve_discrepancy: invalid alpha bracket");
  }
  const double upper = opts.tau * delta;
  std::vector<std::pair<double, double>> curve;
  SolverOptions sopts = opts.solver;

  auto evaluate = [&](double alpha) {
    SolveReport r = solver.solve(alpha, sopts);
    sopts.start = r.rho_hat.matrix();
    curve.emplace_back(alpha, r.residual_norm);
    return r;
  };
  auto finish = [&](SolveReport r, bool ok, std::string diag) {
    r.rule = AlphaRule::discrepancy;
    r.bracket_satisfied = ok;
    r.alpha_trace = curve;
    r.diagnostic = std::move(diag);
    return r;
  };
  auto inside = [&](const SolveReport& r) {
    return r.residual_norm >= delta && r.residual_norm <= upper;
  };

  double lo = opts.alpha_min;
  double hi = opts.alpha_max;
  SolveReport at_hi = evaluate(hi);
  if (inside(at_hi)) return finish(std::move(at_hi), true, "");
  if (at_hi.residual_norm < delta) {
    throw BracketFailure("residual below delta already at alpha_max", curve);
  }
  SolveReport at_lo = evaluate(lo);
  if (inside(at_lo)) return finish(std::move(at_lo), true, "");
  if (at_lo.residual_norm > upper) {
    std::ostringstream os;
    os << "residual " << at_lo.residual_norm << " at alpha_min = " << lo
       << " exceeds tau*delta = " << upper;
    return finish(std::move(at_lo), false, os.str());
  }
  // Restart the warm start from the large-alpha side, where the residual is above the bracket.
  sopts.start = at_hi.rho_hat.matrix();
  for (int i = 0; i < opts.max_bisections; ++i) {
    const double mid = std::sqrt(lo * hi);
    SolveReport r = evaluate(mid);
    if (inside(r)) return finish(std::move(r), true, "");
    if (r.residual_norm > upper) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw BracketFailure("discrepancy bracket not reached after " +
                           std::to_string(opts.max_bisections) + " bisections",
                       curve);
}

SolveReport solve_discrepancy(const Spectrogram& y_obs, const CouplingConfig& cfg,
                              const Discretization& disc, double delta,
                              const DiscrepancyOptions& opts) {
  return solve_discrepancy(TikhonovSolver(y_obs, cfg, disc), delta, opts);
}

ErrorBoundCheck error_bound_check(const SolveReport& report, const DensityMatrix& rho_true,
                                  const IndexFunction& psi, double delta, double tau) {
  ErrorBoundCheck c;
  c.error = (report.rho_hat.matrix() - rho_true.matrix()).norm();
  c.bound = 4.0 * (1.0 + tau) * std::sqrt(psi(delta * delta));
  c.ratio = c.error / c.bound;
  c.holds = c.error <= c.bound;
  return c;
}

}  // namespace squirrels
