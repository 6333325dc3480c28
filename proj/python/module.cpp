#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "jcqoc/app/runner.hpp"
#include "jcqoc/errors.hpp"
#include "jcqoc/lindblad.hpp"
#include "jcqoc/model.hpp"
#include "jcqoc/optimizer.hpp"
#include "jcqoc/speedlimit.hpp"

namespace py = pybind11;
using namespace jcqoc;

namespace {

AngularConvention convention_of(const std::string& s) {
  if (s == "literal") return AngularConvention::literal;
  if (s == "two_pi") return AngularConvention::two_pi;
  throw ConfigError("convention must be 'literal' or 'two_pi'");
}

double delta_of(const ControlProblem& p) { return p.model->omega_c() - p.model->omega_z(); }

SchedulePtr schedule_of(const ControlProblem& p, const std::optional<CrabParams>& params) {
  return params ? p.schedule(*params) : p.adiabatic_schedule();
}

py::dict report_dict(const OptimizationReport& r) {
  py::dict d;
  d["params"] = r.best_params;
  d["fidelity"] = r.best_fidelity;
  d["optimizer_fidelity"] = r.optimizer_fidelity;
  d["evaluations"] = r.evaluations;
  d["iterations"] = r.iterations_used;
  d["converged"] = r.converged;
  d["success"] = r.success;
  d["restart_index"] = r.restart_index;
  d["restart_seed"] = r.restart_seed;
  d["restarts_run"] = r.restarts_run;
  d["history"] = r.fidelity_history;
  d["wall_time"] = r.wall_time;
  return d;
}

GroundState ground_at(const LatticeConfig& lattice, double g, double j, double delta) {
  const HamiltonianModel model(enumerate_sector(lattice, lattice.n_excitations), delta);
  return ground_state(model.at({g, j}));
}

}  // namespace

PYBIND11_MODULE(_jcqoc, m) {
  m.doc() = "Jaynes-Cummings lattice optimal control";
  m.attr("__version__") = JCQOC_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<AccuracyError>(m, "AccuracyError", PyExc_ArithmeticError);

  py::class_<LatticeConfig>(m, "Lattice")
      .def(py::init([](int n_sites, int n_excitations, int fock_cutoff, double omega_c, bool periodic) {
             LatticeConfig c;
             c.n_sites = n_sites;
             c.n_excitations = n_excitations;
             c.fock_cutoff = fock_cutoff;
             c.omega_c = omega_c;
             c.omega_z = omega_c;
             c.periodic = periodic;
             c.validate();
             return c;
           }),
           py::arg("n_sites") = 4, py::arg("n_excitations") = 4, py::arg("fock_cutoff") = 4,
           py::arg("omega_c") = 0.0, py::arg("periodic") = true)
      .def_readonly("n_sites", &LatticeConfig::n_sites)
      .def_readonly("n_excitations", &LatticeConfig::n_excitations)
      .def_readonly("fock_cutoff", &LatticeConfig::fock_cutoff)
      .def_readonly("omega_c", &LatticeConfig::omega_c)
      .def_readonly("periodic", &LatticeConfig::periodic);

  py::class_<Constraints>(m, "Constraints")
      .def(py::init([](double g_max, double j_max) {
             Constraints c{g_max, j_max};
             c.validate();
             return c;
           }),
           py::arg("g_max") = 1.0, py::arg("j_max") = 2.0)
      .def_readonly("g_max", &Constraints::g_max)
      .def_readonly("j_max", &Constraints::j_max);

  py::class_<DecoherenceRates>(m, "DecoherenceRates")
      .def(py::init([](double kappa, double gamma, double gamma_d) {
             DecoherenceRates r{kappa, gamma, gamma_d};
             r.validate();
             return r;
           }),
           py::arg("kappa") = 0.0, py::arg("gamma") = 0.0, py::arg("gamma_d") = 0.0)
      .def_readonly("kappa", &DecoherenceRates::kappa)
      .def_readonly("gamma", &DecoherenceRates::gamma)
      .def_readonly("gamma_d", &DecoherenceRates::gamma_d);
  m.def("reference_rates", &reference_rates);

  py::class_<CrabParams>(m, "CrabParams")
      .def(py::init<>())
      .def(py::init([](const std::vector<double>& flat) { return CrabParams::from_flat(flat); }), py::arg("flat"))
      .def("flat", &CrabParams::flat)
      .def_readonly_static("size", &CrabParams::kSize);
  m.def("random_params", [](std::uint64_t seed, double coef_range, double offset_range) {
    return random_params(seed, {coef_range, offset_range});
  }, py::arg("seed"), py::arg("coef_range") = 1.0, py::arg("offset_range") = 0.5);

  py::class_<ControlProblem>(m, "Problem")
      .def(py::init([](const LatticeConfig& lattice, std::pair<double, double> initial, std::pair<double, double> target,
                       const Constraints& constraints, double total_time, double delta, const std::string& convention) {
             const BasisPtr b = enumerate_sector(lattice, lattice.n_excitations);
             return ControlProblem::ground_state_transfer(b, {initial.first, initial.second, delta},
                                                          {target.first, target.second, delta}, constraints,
                                                          total_time, convention_of(convention));
           }),
           py::arg("lattice") = LatticeConfig{}, py::arg("initial") = std::pair{0.0, 0.5},
           py::arg("target") = std::pair{1.0, 0.02}, py::arg("constraints") = Constraints{1.0, 2.0},
           py::arg("total_time"), py::arg("delta") = 0.0, py::arg("convention") = "literal")
      .def_property_readonly("total_time", &ControlProblem::total_time)
      .def_property_readonly("dimension", [](const ControlProblem& p) { return p.psi0.dim(); })
      .def_property_readonly("psi0", [](const ControlProblem& p) { return p.psi0.amplitudes(); })
      .def_property_readonly("psi_target", [](const ControlProblem& p) { return p.psi_target.amplitudes(); })
      .def_readwrite("optimizer_steps", &ControlProblem::optimizer_steps)
      .def_readwrite("report_steps", &ControlProblem::report_steps)
      .def("with_time", &ControlProblem::with_time, py::arg("total_time"))
      .def("cost", [](const ControlProblem& p, const CrabParams& c) { return cost(c, p); }, py::arg("params"))
      .def("waveform", [](const ControlProblem& p, const std::optional<CrabParams>& params, std::size_t samples) {
             const SchedulePtr s = schedule_of(p, params);
             std::vector<double> t(samples), g(samples), j(samples);
             for (std::size_t k = 0; k < samples; ++k) {
               t[k] = p.total_time() * static_cast<double>(k) / static_cast<double>(samples - 1);
               const ControlValues v = s->at(t[k]);
               g[k] = v.g;
               j[k] = v.j;
             }
             return py::make_tuple(t, g, j);
           }, py::arg("params") = py::none(), py::arg("samples") = 401);

  m.def("sector_dimension", [](const LatticeConfig& lattice, int sector) {
    return enumerate_sector(lattice, sector)->dim();
  }, py::arg("lattice"), py::arg("sector"));

  m.def("ground_state", [](const LatticeConfig& lattice, double g, double j, double delta) {
    const GroundState gs = ground_at(lattice, g, j, delta);
    py::dict d;
    d["energy"] = gs.energy;
    d["gap"] = gs.gap;
    d["amplitudes"] = gs.psi.amplitudes();
    return d;
  }, py::arg("lattice"), py::arg("g"), py::arg("j"), py::arg("delta") = 0.0);

  m.def("spdm", [](const LatticeConfig& lattice, double g, double j, int site_i, int site_j, double delta) {
    return spdm(ground_at(lattice, g, j, delta).psi, site_i, site_j);
  }, py::arg("lattice"), py::arg("g"), py::arg("j"), py::arg("site_i"), py::arg("site_j"), py::arg("delta") = 0.0);

  m.def("bures_angle", [](const ControlProblem& p) { return bures_angle(p.psi0, p.psi_target); }, py::arg("problem"));

  m.def("adiabatic_fidelity", [](const ControlProblem& p) { return adiabatic_fidelity(p); }, py::arg("problem"),
        py::call_guard<py::gil_scoped_release>());
  m.def("pulse_fidelity", [](const CrabParams& c, const ControlProblem& p) { return pulse_fidelity(c, p); },
        py::arg("params"), py::arg("problem"), py::call_guard<py::gil_scoped_release>());

  m.def("optimize", [](const ControlProblem& p, std::size_t max_evaluations, std::size_t restarts, std::uint64_t seed,
                       double threshold_fidelity, bool stop_at_threshold, double initial_step, std::size_t workers) {
    PulseOptions o;
    o.nelder_mead.max_evaluations = max_evaluations;
    o.nelder_mead.initial_step = initial_step;
    o.restarts = restarts;
    o.seed = seed;
    o.threshold_fidelity = threshold_fidelity;
    o.stop_at_threshold = stop_at_threshold;
    o.workers = workers;
    OptimizationReport r;
    {
      py::gil_scoped_release release;
      r = optimize_pulse(p, o);
    }
    return report_dict(r);
  }, py::arg("problem"), py::arg("max_evaluations") = 20000, py::arg("restarts") = 5, py::arg("seed") = 0,
     py::arg("threshold_fidelity") = 0.99, py::arg("stop_at_threshold") = false, py::arg("initial_step") = 0.1,
     py::arg("workers") = 1);

  m.def("noise_robustness", [](const ControlProblem& p, const CrabParams& c, const std::vector<double>& sigmas,
                               std::size_t samples, std::uint64_t seed, int grid_points, std::size_t workers) {
    std::vector<NoisePoint> pts;
    {
      py::gil_scoped_release release;
      pts = noise_robustness(p, c, sigmas, samples, seed, grid_points, workers);
    }
    py::list out;
    for (const NoisePoint& q : pts) {
      py::dict d;
      d["sigma"] = q.sigma;
      d["mean"] = q.mean_fidelity;
      d["std"] = q.std_fidelity;
      d["samples"] = q.n_samples;
      out.append(d);
    }
    return out;
  }, py::arg("problem"), py::arg("params"), py::arg("sigmas"), py::arg("samples") = 200, py::arg("seed") = 0,
     py::arg("grid_points") = 100, py::arg("workers") = 1);

  m.def("lindblad_fidelity", [](const ControlProblem& p, const std::optional<CrabParams>& params,
                                const DecoherenceRates& rates, double dt) {
    LindbladResult r = [&] {
      py::gil_scoped_release release;
      const auto sum = build_sector_sum_basis(p.psi0.basis()->config());
      const SchedulePtr s = schedule_of(p, params);
      return evolve_lindblad(DensityMatrix::pure(sum, p.psi0), *s, rates, p.total_time(),
                             dt > 0.0 ? dt : p.report_dt(), p.psi_target, delta_of(p));
    }();
    py::dict d;
    d["fidelity"] = r.fidelity;
    d["trace_drift"] = r.max_trace_drift;
    d["hermiticity_error"] = r.max_hermiticity_error;
    d["min_eigenvalue"] = r.min_eigenvalue;
    return d;
  }, py::arg("problem"), py::arg("params") = py::none(), py::arg("rates") = reference_rates(), py::arg("dt") = 0.0);

  m.def("speed_limit", [](const ControlProblem& p, const std::optional<CrabParams>& params) {
    QslEstimate q = [&] {
      py::gil_scoped_release release;
      const SchedulePtr s = schedule_of(p, params);
      const Trajectory t = evolve(*p.model, p.psi0, *s, p.total_time(), p.report_dt());
      return estimate_qsl(p.psi0, p.psi_target, t);
    }();
    py::dict d;
    d["distance"] = q.distance;
    d["delta_e_ave"] = q.delta_e_ave;
    d["t_qsl"] = q.t_qsl;
    return d;
  }, py::arg("problem"), py::arg("params") = py::none());

  m.def("run", [](const std::string& subcommand, const std::string& config, std::optional<std::uint64_t> seed,
                  std::optional<std::string> out, std::optional<std::size_t> workers, std::optional<double> dt) {
    app::Overrides o{seed, out, workers, dt};
    std::ostringstream log;
    int code;
    {
      py::gil_scoped_release release;
      code = app::run_main(subcommand, config, o, log);
    }
    return py::make_tuple(code, log.str());
  }, py::arg("subcommand"), py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none(),
     py::arg("workers") = py::none(), py::arg("dt") = py::none());
}
