#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "squirrels/analysis.hpp"
#include "squirrels/cli.hpp"
#include "squirrels/errors.hpp"
#include "squirrels/experiments.hpp"
#include "squirrels/forward.hpp"
#include "squirrels/index_function.hpp"
#include "squirrels/io.hpp"
#include "squirrels/multiplier.hpp"
#include "squirrels/solver.hpp"
#include "squirrels/states.hpp"

namespace py = pybind11;
using namespace squirrels;

namespace {

py::object json_loads(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

ExperimentConfig config_from(const py::object& obj) {
  if (obj.is_none()) return {};
  if (py::isinstance<py::str>(obj)) return decode_config_json(obj.cast<std::string>());
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return decode_config_json(text);
}

Spectrogram make_spectrogram(const RealMatrix& p, int n_half, int buffer) {
  if (n_half < 1 || buffer < 0) throw ConfigError("n_half must be >= 1 and buffer >= 0");
  if (p.rows() != 2 * (n_half + buffer) + 1) {
    throw ConfigError("spectrogram has " + std::to_string(p.rows()) + " rows, expected " +
                      std::to_string(2 * (n_half + buffer) + 1));
  }
  return Spectrogram{n_half, buffer, p};
}

py::dict certificate_dict(const VscCertificate& c) {
  py::dict d;
  d["prior"] = format_prior(c.prior);
  d["nu"] = c.nu;
  d["eps_max"] = c.eps_max;
  d["epsilons"] = c.epsilons;
  d["kappa"] = c.kappa;
  d["sigma"] = c.sigma;
  d["taus"] = c.taus;
  d["psi"] = c.psi;
  d["kappa_monotone"] = c.kappa_monotone;
  d["kappa_decay"] = c.kappa_decay;
  d["kappa_slope"] = c.kappa_slope;
  d["psi_monotone"] = c.psi_monotone;
  d["psi_concave"] = c.psi_concave;
  py::dict fit;
  fit["exponent"] = c.fit.exponent;
  fit["c"] = c.fit.c;
  fit["c_envelope"] = c.fit.c_envelope;
  fit["tau_lo"] = c.fit.tau_lo;
  fit["tau_hi"] = c.fit.tau_hi;
  d["fit"] = fit;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phase-space state reconstruction from electron energy spectrograms";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
  py::register_exception<HypothesisError>(m, "HypothesisError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  auto conv = py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", conv.ptr());
  py::register_exception<BracketFailure>(m, "BracketFailure", base.ptr());
  py::register_exception<SweepFailure>(m, "SweepFailure", base.ptr());

  py::class_<CouplingConfig>(m, "Coupling")
      .def(py::init([](double g) {
             CouplingConfig c{g};
             c.validate();
             return c;
           }),
           py::arg("g"))
      .def_readonly("g", &CouplingConfig::g_abs);

  py::class_<Discretization>(m, "Discretization")
      .def(py::init([](int n_half, const CouplingConfig& cfg, int buffer, int m_theta, int m_phi,
                       double tail_tol) {
             Discretization::Options o;
             o.buffer = buffer;
             o.m_theta = m_theta;
             o.m_phi = m_phi;
             o.tail_tol = tail_tol;
             return Discretization(n_half, cfg, o);
           }),
           py::arg("n_half"), py::arg("coupling"), py::arg("buffer") = -1,
           py::arg("m_theta") = 0, py::arg("m_phi") = 0, py::arg("tail_tol") = 1e-13)
      .def_property_readonly("n_half", &Discretization::n_half)
      .def_property_readonly("buffer", &Discretization::buffer)
      .def_property_readonly("m_theta", &Discretization::m_theta)
      .def_property_readonly("m_phi", &Discretization::m_phi)
      .def_property_readonly("tail_tol", &Discretization::tail_tol)
      .def_property_readonly("dim", &Discretization::dim)
      .def_property_readonly("out_dim", &Discretization::out_dim);

  py::class_<Spectrogram>(m, "Spectrogram")
      .def(py::init(&make_spectrogram), py::arg("p"), py::arg("n_half"), py::arg("buffer"))
      .def_readonly("n_half", &Spectrogram::n_half)
      .def_readonly("buffer", &Spectrogram::buffer)
      .def_readonly("p", &Spectrogram::p)
      .def("norm", [](const Spectrogram& y) { return norm(y); });

  py::class_<DensityMatrix>(m, "DensityMatrix")
      .def(py::init(&DensityMatrix::from_matrix), py::arg("matrix"))
      .def_property_readonly("matrix", &DensityMatrix::matrix)
      .def_property_readonly("n_half", &DensityMatrix::n_half)
      .def_static("maximally_mixed", &DensityMatrix::maximally_mixed, py::arg("n_half"));

  m.def("project_to_constraint", &project_to_constraint, py::arg("h"),
        "Frobenius projection of a Hermitian matrix onto the density matrices.");
  m.def("make_band_limited", &make_band_limited, py::arg("n_half"), py::arg("k0"),
        py::arg("seed"));
  m.def("make_random_density", &make_random_density, py::arg("n_half"), py::arg("seed"),
        py::arg("rank") = 0);

  py::class_<ForwardOperator>(m, "ForwardOperator")
      .def(py::init<const CouplingConfig&, const Discretization&>(), py::arg("coupling"),
           py::arg("disc"))
      .def("apply", &ForwardOperator::apply, py::arg("rho"))
      .def("adjoint", &ForwardOperator::adjoint, py::arg("y"));
  m.def("apply_direct",
        py::overload_cast<const ComplexMatrix&, const CouplingConfig&, const Discretization&>(
            &apply_direct),
        py::arg("rho"), py::arg("coupling"), py::arg("disc"));
  m.def("operator_norm",
        py::overload_cast<const CouplingConfig&, const Discretization&>(&operator_norm_estimate),
        py::arg("coupling"), py::arg("disc"));

  m.def("multiplier", &m_closed_form, py::arg("phi"), py::arg("k"), py::arg("coupling"));
  m.def("multiplier_series", &m_fourier_series, py::arg("phi"), py::arg("k"),
        py::arg("coupling"), py::arg("truncation") = -1);
  m.def("sublevel_measure", &sublevel_measure, py::arg("epsilon"), py::arg("k"),
        py::arg("coupling"), py::arg("resolution") = SublevelGeometry::kMinResolution);

  py::enum_<SolverMethod>(m, "SolverMethod")
      .value("apg", SolverMethod::apg)
      .value("admm", SolverMethod::admm);
  py::enum_<AlphaRule>(m, "AlphaRule")
      .value("fixed", AlphaRule::fixed)
      .value("a_priori", AlphaRule::a_priori)
      .value("discrepancy", AlphaRule::discrepancy);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init([](SolverMethod method, double tol, int max_iter) {
             SolverOptions o;
             o.method = method;
             o.tol = tol;
             o.max_iter = max_iter;
             return o;
           }),
           py::arg("method") = SolverMethod::apg, py::arg("tol") = 1e-8,
           py::arg("max_iter") = 20000)
      .def_readwrite("method", &SolverOptions::method)
      .def_readwrite("tol", &SolverOptions::tol)
      .def_readwrite("max_iter", &SolverOptions::max_iter);

  py::class_<SolveReport>(m, "SolveReport")
      .def_property_readonly("rho_hat",
                             [](const SolveReport& r) { return r.rho_hat.matrix(); })
      .def_readonly("residual_norm", &SolveReport::residual_norm)
      .def_readonly("objective", &SolveReport::objective)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("alpha_used", &SolveReport::alpha_used)
      .def_readonly("rule", &SolveReport::rule)
      .def_readonly("bracket_satisfied", &SolveReport::bracket_satisfied)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("fixed_point_residual", &SolveReport::fixed_point_residual)
      .def_readonly("diagnostic", &SolveReport::diagnostic)
      .def("to_json",
           [](const SolveReport& r, double delta, double tau) {
             return json_loads(encode_report_json(r, delta, tau));
           },
           py::arg("delta") = 0.0, py::arg("tau") = 0.0);

  py::class_<TikhonovSolver>(m, "TikhonovSolver")
      .def(py::init<const Spectrogram&, const CouplingConfig&, const Discretization&>(),
           py::arg("y"), py::arg("coupling"), py::arg("disc"))
      .def("residual", &TikhonovSolver::residual, py::arg("rho"))
      .def("objective", &TikhonovSolver::objective, py::arg("rho"), py::arg("alpha"))
      .def("solve", &TikhonovSolver::solve, py::arg("alpha"),
           py::arg("options") = SolverOptions{}, py::call_guard<py::gil_scoped_release>());

  m.def(
      "solve_discrepancy",
      [](const TikhonovSolver& solver, double delta, double tau, const SolverOptions& opts) {
        DiscrepancyOptions d;
        d.tau = tau;
        d.solver = opts;
        return solve_discrepancy(solver, delta, d);
      },
      py::arg("solver"), py::arg("delta"), py::arg("tau") = 1.5,
      py::arg("options") = SolverOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def(
      "choose_alpha_a_priori",
      [](const std::string& prior, double delta, double psi_c) {
        return choose_alpha_a_priori(IndexFunction::for_prior(parse_prior(prior), psi_c), delta);
      },
      py::arg("prior"), py::arg("delta"), py::arg("psi_c") = 1.0);

  m.def("parse_prior", [](const std::string& s) { return format_prior(parse_prior(s)); },
        py::arg("text"), "Validates a prior string and returns its canonical form.");
  m.def(
      "rate",
      [](const std::string& prior, double delta, double c) {
        return rate_function(parse_prior(prior), c)(delta);
      },
      py::arg("prior"), py::arg("delta"), py::arg("c") = 1.0);

  m.def(
      "true_state",
      [](const py::object& config) { return make_true_state(config_from(config)).rho.matrix(); },
      py::arg("config") = py::none());
  m.def(
      "generate_dataset",
      [](const py::object& config) {
        const auto man = generate_dataset(config_from(config));
        py::dict d;
        d["rho_path"] = man.rho_path;
        d["clean_path"] = man.clean_path;
        py::list entries;
        for (const auto& e : man.entries) {
          py::dict x;
          x["delta"] = e.delta;
          x["seed"] = e.seed;
          x["path"] = e.path;
          x["realized_noise"] = e.realized_noise;
          entries.append(x);
        }
        d["entries"] = entries;
        return d;
      },
      py::arg("config"));
  m.def(
      "run_rate_sweep",
      [](const py::object& config) {
        const auto cfg = config_from(config);
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_rate_sweep(cfg);
        }
        return json_loads(encode_summary_json(cfg, result));
      },
      py::arg("config"), "Runs the sweep and returns the summary document.");

  m.def(
      "read_spectrogram",
      [](const std::string& path) {
        const auto loaded = read_spectrogram(path);
        return py::make_tuple(loaded.y, json_loads(encode_meta_json(loaded.meta)));
      },
      py::arg("path"), "Returns (Spectrogram, sidecar metadata dict).");
  m.def("read_matrix", &read_matrix, py::arg("path"));

  m.def(
      "vsc_certificate",
      [](const ComplexMatrix& rho, const std::string& prior, const CouplingConfig& cfg,
         const Discretization& disc, double nu, double eps_max) {
        VscOptions opts;
        opts.nu = nu;
        opts.eps_max = eps_max;
        return certificate_dict(
            vsc_certificate(DensityMatrix::from_matrix(rho), parse_prior(prior), cfg, disc, opts));
      },
      py::arg("rho"), py::arg("prior"), py::arg("coupling"), py::arg("disc"),
      py::arg("nu") = 0.0, py::arg("eps_max") = 1e-2);
  m.def(
      "singular_values",
      [](const CouplingConfig& cfg, const Discretization& disc, int count) {
        return singular_spectrum(cfg, disc, count).all;
      },
      py::arg("coupling"), py::arg("disc"), py::arg("count") = 1,
      "All singular values of the forward map on Hermitian matrices, descending.");

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "squirrels");
        std::ostringstream out, err;
        const int code = cli_main(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr).");
}
