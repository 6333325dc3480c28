#include "jcqoc/app/runner.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "jcqoc/errors.hpp"
#include "jcqoc/lindblad.hpp"
#include "jcqoc/optimizer.hpp"
#include "jcqoc/parallel.hpp"
#include "jcqoc/propagate.hpp"
#include "jcqoc/spectrum.hpp"
#include "jcqoc/speedlimit.hpp"

#ifndef JCQOC_VERSION
#define JCQOC_VERSION "0.0.0"
#endif

namespace jcqoc::app {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"ground",    "spdm-map", "adiabatic", "optimize", "sweep",
                                              "threshold", "qsl",      "noise",     "lindblad"};
  return names;
}

RunConfig apply_overrides(RunConfig cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.workers) cfg.workers = *o.workers;
  if (o.dt) cfg.dt = *o.dt;
  cfg.validate();
  return cfg;
}

namespace {

using Clock = std::chrono::steady_clock;

// Collects artifacts in memory and writes them at the end, so every header
// carries the final wall time and a failed run leaves nothing half-written.
class Artifacts {
 public:
  Artifacts(const RunConfig& cfg, std::string subcommand)
      : cfg_(cfg), subcommand_(std::move(subcommand)), start_(Clock::now()) {}

  void csv(const std::string& name, std::string body) { files_.push_back({name, std::move(body), false}); }
  void json_file(const std::string& name, json body) { files_.push_back({name, body.dump(2), true}); }

  json metadata(double wall) const {
    return {{"schema_version", kSchemaVersion}, {"version", JCQOC_VERSION}, {"subcommand", subcommand_},
            {"config_hash", config_hash(cfg_)},  {"seed", cfg_.seed},       {"wall_time_s", wall}};
  }

  fs::path flush() const {
    const double wall = std::chrono::duration<double>(Clock::now() - start_).count();
    const json meta = metadata(wall);
    const fs::path dir = fs::path(cfg_.output_dir) / subcommand_;
    fs::create_directories(dir);
    for (const auto& f : files_) {
      std::ofstream out(dir / f.name);
      if (!out) throw std::runtime_error("cannot write " + (dir / f.name).string());
      if (f.is_json) {
        json body = json::parse(f.body);
        body["metadata"] = meta;
        out << body.dump(2) << '\n';
      } else {
        for (const auto& [k, v] : meta.items()) out << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        out << f.body;
      }
    }
    std::ofstream(dir / "config.json") << to_json(cfg_).dump(2) << '\n';
    return dir;
  }

 private:
  struct File {
    std::string name;
    std::string body;
    bool is_json;
  };
  const RunConfig& cfg_;
  std::string subcommand_;
  Clock::time_point start_;
  std::vector<File> files_;
};

json params_json(const CrabParams& p) {
  return {{"c1", p.c1}, {"c2", p.c2}, {"d1", p.d1}, {"d2", p.d2}, {"dw1", p.dw1}, {"dw2", p.dw2}};
}

std::string convention_name(AngularConvention c) { return c == AngularConvention::literal ? "literal" : "two_pi"; }

json pulse_json(const RunConfig& cfg, double total_time, const CrabParams& p) {
  return {{"total_time", total_time},
          {"total_time_over_pi", total_time / std::numbers::pi},
          {"constraints", {{"g_max", cfg.constraints.g_max}, {"j_max", cfg.constraints.j_max}}},
          {"angular_convention", convention_name(cfg.convention)},
          {"params", params_json(p)},
          {"flat", p.flat()}};
}

CrabParams load_pulse(const RunConfig& cfg) {
  const fs::path path = *cfg.pulse_file;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pulse file " + path.string());
  try {
    const json j = json::parse(in);
    const auto flat = j.at("flat").get<std::vector<double>>();
    if (flat.size() != CrabParams::kSize) throw ConfigError("pulse file: expected 48 parameters");
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
    if (!close(j.at("total_time").get<double>(), cfg.total_time))
      throw ConfigError("pulse file: total_time differs from the config");
    const auto& c = j.at("constraints");
    if (!close(c.at("g_max").get<double>(), cfg.constraints.g_max) ||
        !close(c.at("j_max").get<double>(), cfg.constraints.j_max))
      throw ConfigError("pulse file: constraints differ from the config");
    if (j.at("angular_convention").get<std::string>() != convention_name(cfg.convention))
      throw ConfigError("pulse file: angular_convention differs from the config");
    CrabParams p = CrabParams::from_flat(flat);
    if (!p.finite()) throw ConfigError("pulse file: non-finite parameters");
    return p;
  } catch (const json::exception& e) {
    throw ConfigError("pulse file " + path.string() + ": " + e.what());
  }
}

class Runner {
 public:
  Runner(const RunConfig& cfg, std::ostream& log, std::string sub)
      : cfg_(cfg), log_(log), out_(cfg, sub), sub_(std::move(sub)) {
    if (cfg.pulse_file && cfg.schedule == "crab") loaded_ = load_pulse(cfg);
    basis_ = enumerate_sector(cfg.lattice, cfg.lattice.n_excitations);
  }

  int dispatch() {
    int code = kOk;
    if (sub_ == "ground") ground();
    else if (sub_ == "spdm-map") spdm_map();
    else if (sub_ == "adiabatic") adiabatic();
    else if (sub_ == "optimize") optimize();
    else if (sub_ == "sweep") sweep();
    else if (sub_ == "threshold") code = threshold();
    else if (sub_ == "qsl") qsl();
    else if (sub_ == "noise") noise();
    else if (sub_ == "lindblad") lindblad();
    else throw ConfigError("unknown subcommand '" + sub_ + "'");
    const fs::path dir = out_.flush();
    log_ << "wrote " << dir.string() << '\n';
    return code;
  }

 private:
  const ControlProblem& base() {
    if (!base_)
      base_ = ControlProblem::ground_state_transfer(basis_, cfg_.initial, cfg_.target, cfg_.constraints,
                                                    cfg_.total_time, cfg_.convention);
    return *base_;
  }

  ControlProblem problem_at(double t) {
    ControlProblem p = base().with_time(t);
    p.optimizer_steps = cfg_.optimizer.steps;
    p.report_steps = step_count(t, cfg_.report_dt(t));
    return p;
  }

  PulseOptions pulse_options(std::size_t workers) const {
    PulseOptions o;
    o.nelder_mead = cfg_.optimizer.nelder_mead;
    if (cfg_.optimizer.adaptive) o.nelder_mead = adaptive_coefficients(o.nelder_mead, CrabParams::kSize);
    o.restarts = cfg_.optimizer.restarts;
    o.seed = cfg_.seed;
    o.threshold_fidelity = cfg_.optimizer.threshold_fidelity;
    o.stop_at_threshold = cfg_.optimizer.stop_at_threshold;
    o.stop_after_success = cfg_.optimizer.stop_after_success;
    o.init = cfg_.optimizer.init;
    o.workers = workers;
    return o;
  }

  // Report-precision trajectory; halves the step on norm drift like
  // schedule_fidelity does.
  Trajectory trajectory(const ControlProblem& p, const ControlSchedule& s) {
    EvolveOptions opts;
    opts.sample_every = cfg_.sample_every;
    opts.target = p.psi_target;
    double dt = p.report_dt();
    for (int attempt = 0;; ++attempt) {
      try {
        return evolve(*p.model, p.psi0, s, p.total_time(), dt, opts);
      } catch (const AccuracyError&) {
        if (attempt >= 3) throw;
        dt *= 0.5;
        opts.sample_every *= 2;
      }
    }
  }

  static json report_json(const OptimizationReport& r) {
    return {{"best_fidelity", r.best_fidelity},       {"optimizer_fidelity", r.optimizer_fidelity},
            {"report_dt", r.report_dt},               {"iterations", r.iterations_used},
            {"evaluations", r.evaluations},           {"converged", r.converged},
            {"success", r.success},                   {"restart_index", r.restart_index},
            {"restart_seed", r.restart_seed},         {"restarts_run", r.restarts_run},
            {"optimizer_wall_time_s", r.wall_time}};
  }

  static std::string trajectory_csv(const Trajectory& t) {
    std::ostringstream os;
    write_trajectory_csv(os, t);
    return os.str();
  }

  std::string waveform_csv(const ControlSchedule& s) const {
    std::ostringstream os;
    write_waveform_csv(os, s, cfg_.waveform_samples);
    return os.str();
  }

  struct Pulse {
    SchedulePtr schedule;
    std::optional<CrabParams> params;
    json info;
  };

  // The control used by qsl/noise/lindblad: the linear ramp, a pulse file, or
  // a fresh optimization at total_time.
  Pulse pulse(const ControlProblem& p) {
    if (cfg_.schedule == "adiabatic") return {p.adiabatic_schedule(), std::nullopt, {{"source", "adiabatic"}}};
    if (loaded_) return {p.schedule(*loaded_), loaded_, {{"source", "pulse_file"}, {"pulse_file", *cfg_.pulse_file}}};
    log_ << "optimizing pulse at T = " << p.total_time() / std::numbers::pi << " pi\n";
    OptimizationReport r = optimize_pulse(p, pulse_options(cfg_.workers));
    out_.json_file("pulse.json", pulse_json(cfg_, p.total_time(), r.best_params));
    json info = report_json(r);
    info["source"] = "optimized";
    return {p.schedule(r.best_params), r.best_params, info};
  }

  void ground() {
    json points = json::array();
    const HamiltonianModel model(basis_, cfg_.initial.delta);
    std::optional<StateVector> first;
    for (std::size_t k = 0; k < cfg_.ground_points.size(); ++k) {
      const Couplings& c = cfg_.ground_points[k];
      const GroundState gs = ground_state(model.at({c.g, c.j_hop}));
      json pt{{"index", k}, {"g", c.g}, {"j", c.j_hop}, {"energy", gs.energy}, {"gap", gs.gap}};
      const bool unit = cfg_.lattice.n_excitations == cfg_.lattice.n_sites;
      if (unit && c.g == 0.0 && cfg_.lattice.fock_cutoff >= cfg_.lattice.n_sites)
        pt["fidelity_vs_analytic_sf"] = fidelity(gs.psi, analytic_sf_state(basis_));
      if (unit && c.j_hop == 0.0 && c.g != 0.0)
        pt["fidelity_vs_analytic_mi"] = fidelity(gs.psi, analytic_mi_state(basis_, c.g, c.delta));
      if (first) pt["bures_angle_from_first"] = bures_angle(*first, gs.psi);
      else first = gs.psi;

      std::ostringstream st;
      st << "index,photons,qubits,re,im\n" << std::setprecision(17);
      for (std::size_t i = 0; i < basis_->dim(); ++i) {
        const Occupation& o = basis_->state(i);
        st << i << ',';
        for (auto n : o.photons) st << int(n);
        st << ',';
        for (auto q : o.qubits) st << int(q);
        const Complex a = gs.psi.amplitudes()[static_cast<Eigen::Index>(i)];
        st << ',' << a.real() << ',' << a.imag() << '\n';
      }
      out_.csv("state_" + std::to_string(k) + ".csv", st.str());

      std::ostringstream sp;
      sp << "i,j,correlator_re,correlator_im,rho1_re,rho1_im\n" << std::setprecision(17);
      for (int i = 1; i <= cfg_.lattice.n_sites; ++i)
        for (int j = 1; j <= cfg_.lattice.n_sites; ++j) {
          const Complex corr = photon_correlator(gs.psi, i, j);
          const double density = photon_correlator(gs.psi, i, i).real();
          sp << i << ',' << j << ',' << corr.real() << ',' << corr.imag() << ',';
          if (density >= 1e-12) {
            const Complex r = corr / density;
            sp << r.real() << ',' << r.imag();
          } else {
            sp << "nan,nan";
          }
          sp << '\n';
        }
      out_.csv("spdm_" + std::to_string(k) + ".csv", sp.str());
      points.push_back(pt);
    }
    out_.json_file("report.json", {{"dimension", basis_->dim()}, {"points", points}});
  }

  void spdm_map() {
    const auto js = cfg_.spdm_map.j.values();
    const auto ds = cfg_.spdm_map.delta.values();
    std::vector<Complex> rho(js.size() * ds.size());
    auto templates = std::make_shared<const HamiltonianTemplates>(basis_);
    parallel_for(rho.size(), cfg_.workers, [&](std::size_t k) {
      const double jv = js[k / ds.size()], dv = ds[k % ds.size()];
      const HamiltonianModel model(templates, dv);
      const GroundState gs = ground_state(model.at({cfg_.spdm_map.g, jv}));
      rho[k] = spdm(gs.psi, cfg_.spdm_map.site_i, cfg_.spdm_map.site_j);
    });
    std::ostringstream os;
    os << "j,delta,rho1_re,rho1_im,rho1_abs\n" << std::setprecision(17);
    for (std::size_t k = 0; k < rho.size(); ++k)
      os << js[k / ds.size()] << ',' << ds[k % ds.size()] << ',' << rho[k].real() << ',' << rho[k].imag() << ','
         << std::abs(rho[k]) << '\n';
    out_.csv("spdm_map.csv", os.str());
  }

  void adiabatic() {
    const ControlProblem p = problem_at(cfg_.total_time);
    const Trajectory t = trajectory(p, *p.adiabatic_schedule());
    out_.csv("trajectory.csv", trajectory_csv(t));
    json report{{"total_time", p.total_time()},
                {"total_time_over_pi", p.total_time() / std::numbers::pi},
                {"dt", t.dt},
                {"fidelity", fidelity(*t.final_state, p.psi_target)},
                {"delta_e_ave", t.delta_e_ave},
                {"norm_drift", t.norm_drift}};
    if (!cfg_.adiabatic_times.empty()) {
      std::vector<double> f(cfg_.adiabatic_times.size());
      parallel_for(f.size(), cfg_.workers, [&](std::size_t k) { f[k] = adiabatic_fidelity(problem_at(cfg_.adiabatic_times[k])); });
      std::ostringstream os;
      os << "total_time,total_time_over_pi,fidelity\n" << std::setprecision(17);
      for (std::size_t k = 0; k < f.size(); ++k)
        os << cfg_.adiabatic_times[k] << ',' << cfg_.adiabatic_times[k] / std::numbers::pi << ',' << f[k] << '\n';
      out_.csv("fidelity_vs_time.csv", os.str());
    }
    out_.json_file("report.json", report);
  }

  void optimize() {
    const ControlProblem p = problem_at(cfg_.total_time);
    log_ << "optimizing pulse at T = " << p.total_time() / std::numbers::pi << " pi\n";
    const OptimizationReport r = optimize_pulse(p, pulse_options(cfg_.workers));
    const SchedulePtr s = p.schedule(r.best_params);
    const Trajectory t = trajectory(p, *s);
    const Trajectory ta = trajectory(p, *p.adiabatic_schedule());
    json report = report_json(r);
    report["total_time"] = p.total_time();
    report["total_time_over_pi"] = p.total_time() / std::numbers::pi;
    report["threshold_fidelity"] = cfg_.optimizer.threshold_fidelity;
    report["adiabatic_fidelity"] = fidelity(*ta.final_state, p.psi_target);
    report["delta_e_ave"] = t.delta_e_ave;
    report["params"] = params_json(r.best_params);
    out_.json_file("report.json", report);
    out_.json_file("pulse.json", pulse_json(cfg_, p.total_time(), r.best_params));
    out_.csv("waveform.csv", waveform_csv(*s));
    out_.csv("trajectory.csv", trajectory_csv(t));
    out_.csv("adiabatic_trajectory.csv", trajectory_csv(ta));
    std::ostringstream h;
    h << "iteration,fidelity\n" << std::setprecision(17);
    for (std::size_t k = 0; k < r.fidelity_history.size(); ++k) h << k + 1 << ',' << r.fidelity_history[k] << '\n';
    out_.csv("history.csv", h.str());
  }

  void sweep() {
    const std::vector<double>& ts = cfg_.sweep_times.empty() ? std::vector<double>{cfg_.total_time} : cfg_.sweep_times;
    struct Row {
      double f_ad, f_qoc, de_ad, de_qoc;
      OptimizationReport r;
    };
    std::vector<Row> rows(ts.size());
    const std::size_t outer = std::min(cfg_.workers, ts.size());
    const std::size_t inner = std::max<std::size_t>(1, cfg_.workers / std::max<std::size_t>(1, outer));
    parallel_for(ts.size(), outer, [&](std::size_t k) {
      const ControlProblem p = problem_at(ts[k]);
      Row& row = rows[k];
      const Trajectory ta = trajectory(p, *p.adiabatic_schedule());
      row.f_ad = fidelity(*ta.final_state, p.psi_target);
      row.de_ad = ta.delta_e_ave;
      row.r = optimize_pulse(p, pulse_options(inner));
      const Trajectory tq = trajectory(p, *p.schedule(row.r.best_params));
      row.f_qoc = row.r.best_fidelity;
      row.de_qoc = tq.delta_e_ave;
    });
    std::ostringstream os;
    os << "total_time,total_time_over_pi,adiabatic_fidelity,qoc_fidelity,success,delta_e_ave_adiabatic,"
          "delta_e_ave_qoc,restart_index,evaluations\n"
       << std::setprecision(17);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const Row& r = rows[k];
      os << ts[k] << ',' << ts[k] / std::numbers::pi << ',' << r.f_ad << ',' << r.f_qoc << ',' << int(r.r.success)
         << ',' << r.de_ad << ',' << r.de_qoc << ',' << r.r.restart_index << ',' << r.r.evaluations << '\n';
    }
    out_.csv("sweep.csv", os.str());
  }

  int threshold() {
    const std::vector<double>& grid = cfg_.threshold_grid.empty() ? std::vector<double>{cfg_.total_time} : cfg_.threshold_grid;
    const ControlProblem p = problem_at(grid.front());
    ThresholdOptions topt;
    topt.refine_step = cfg_.threshold_refine;
    // problem_at keeps the step count per time; threshold_time rescales T.
    const ThresholdResult res = threshold_time(p, grid, pulse_options(cfg_.workers), topt);

    std::ostringstream os;
    os << "total_time,total_time_over_pi,best_fidelity,success,restart_index,evaluations\n" << std::setprecision(17);
    for (const auto& pt : res.scan_points)
      os << pt.total_time << ',' << pt.total_time / std::numbers::pi << ',' << pt.best_fidelity << ','
         << int(pt.success) << ',' << pt.report.restart_index << ',' << pt.report.evaluations << '\n';
    out_.csv("scan.csv", os.str());

    json report{{"found", res.found}, {"threshold_fidelity", res.threshold_fidelity}, {"grid", grid},
                {"refine_step", cfg_.threshold_refine}};
    if (res.found) {
      const ScanPoint& at = *res.at_threshold;
      const ControlProblem pt = problem_at(at.total_time);
      const Trajectory t = trajectory(pt, *pt.schedule(at.report.best_params));
      const QslEstimate q = estimate_qsl(pt.psi0, pt.psi_target, t);
      report["t_threshold"] = at.total_time;
      report["t_threshold_over_pi"] = at.total_time / std::numbers::pi;
      report["fidelity_at_threshold"] = at.best_fidelity;
      report["qsl"] = {{"distance", q.distance},
                       {"distance_over_pi", q.distance / std::numbers::pi},
                       {"delta_e_ave", q.delta_e_ave},
                       {"t_qsl", q.t_qsl},
                       {"t_qsl_over_pi", q.t_qsl / std::numbers::pi}};
      report["optimization"] = report_json(at.report);
      out_.json_file("pulse.json", pulse_json(cfg_, at.total_time, at.report.best_params));
      out_.csv("trajectory.csv", trajectory_csv(t));
    } else if (res.at_threshold) {
      report["best_time"] = res.at_threshold->total_time;
      report["best_fidelity"] = res.at_threshold->best_fidelity;
    }
    out_.json_file("report.json", report);
    if (!res.found) {
      log_ << "threshold fidelity not reached on the grid\n";
      return kThresholdNotFound;
    }
    return kOk;
  }

  void qsl() {
    const ControlProblem p = problem_at(cfg_.total_time);
    Pulse pl = pulse(p);
    const Trajectory t = trajectory(p, *pl.schedule);
    const Trajectory ta = trajectory(p, *p.adiabatic_schedule());
    const QslEstimate q = estimate_qsl(p.psi0, p.psi_target, t);
    std::ostringstream os;
    os << "t_over_T,delta_e,delta_e_adiabatic\n" << std::setprecision(17);
    for (std::size_t k = 0; k < t.times.size() && k < ta.times.size(); ++k)
      os << t.times[k] / p.total_time() << ',' << t.delta_e_vs_t[k] << ',' << ta.delta_e_vs_t[k] << '\n';
    out_.csv("delta_e.csv", os.str());
    json report{{"total_time", p.total_time()},
                {"total_time_over_pi", p.total_time() / std::numbers::pi},
                {"fidelity", fidelity(*t.final_state, p.psi_target)},
                {"distance", q.distance},
                {"distance_over_pi", q.distance / std::numbers::pi},
                {"delta_e_ave", q.delta_e_ave},
                {"delta_e_ave_adiabatic", ta.delta_e_ave},
                {"t_qsl", q.t_qsl},
                {"t_qsl_over_pi", q.t_qsl / std::numbers::pi},
                {"pulse", pl.info}};
    out_.json_file("report.json", report);

    if (!cfg_.qsl_times.empty()) {
      const auto& ts = cfg_.qsl_times;
      std::vector<std::array<double, 3>> rows(ts.size());
      parallel_for(ts.size(), cfg_.workers, [&](std::size_t k) {
        const ControlProblem pk = problem_at(ts[k]);
        const Trajectory tak = trajectory(pk, *pk.adiabatic_schedule());
        double de = tak.delta_e_ave, f = fidelity(*tak.final_state, pk.psi_target);
        if (cfg_.schedule == "crab") {
          const OptimizationReport r = optimize_pulse(pk, pulse_options(1));
          const Trajectory tk = trajectory(pk, *pk.schedule(r.best_params));
          de = tk.delta_e_ave;
          f = r.best_fidelity;
        }
        rows[k] = {de, tak.delta_e_ave, f};
      });
      std::ostringstream ds;
      ds << "total_time,total_time_over_pi,delta_e_ave,delta_e_ave_adiabatic,fidelity\n" << std::setprecision(17);
      for (std::size_t k = 0; k < ts.size(); ++k)
        ds << ts[k] << ',' << ts[k] / std::numbers::pi << ',' << rows[k][0] << ',' << rows[k][1] << ',' << rows[k][2] << '\n';
      out_.csv("delta_e_ave_vs_time.csv", ds.str());
    }
  }

  void noise() {
    const ControlProblem p = problem_at(cfg_.total_time);
    Pulse pl = pulse(p);
    std::vector<NoisePoint> pts;
    if (pl.params) {
      pts = noise_robustness(p, *pl.params, cfg_.noise_sigmas, cfg_.noise_samples, cfg_.seed,
                             cfg_.noise_grid_points, cfg_.workers);
    } else {
      // Ramp schedule: same sampling, no CRAB parameters.
      for (double sigma : cfg_.noise_sigmas) {
        std::vector<double> f(cfg_.noise_samples);
        parallel_for(f.size(), cfg_.workers, [&](std::size_t i) {
          f[i] = schedule_fidelity(p, *apply_noise(pl.schedule, {sigma, cfg_.noise_grid_points, cfg_.seed + i}));
        });
        double mean = 0.0, var = 0.0;
        for (double v : f) mean += v;
        mean /= double(f.size());
        for (double v : f) var += (v - mean) * (v - mean);
        pts.push_back({sigma, mean, f.size() > 1 ? std::sqrt(var / double(f.size() - 1)) : 0.0, f.size()});
      }
    }
    std::ostringstream os;
    os << "sigma,mean_fidelity,std_fidelity,stderr_fidelity,n_samples\n" << std::setprecision(17);
    json rows = json::array();
    for (const auto& n : pts) {
      const double se = n.std_fidelity / std::sqrt(double(n.n_samples));
      os << n.sigma << ',' << n.mean_fidelity << ',' << n.std_fidelity << ',' << se << ',' << n.n_samples << '\n';
      rows.push_back({{"sigma", n.sigma}, {"mean_fidelity", n.mean_fidelity}, {"std_fidelity", n.std_fidelity},
                      {"stderr_fidelity", se}, {"n_samples", n.n_samples}});
    }
    out_.csv("noise.csv", os.str());
    out_.json_file("report.json", {{"total_time", p.total_time()},
                                   {"total_time_over_pi", p.total_time() / std::numbers::pi},
                                   {"grid_points", cfg_.noise_grid_points},
                                   {"points", rows},
                                   {"pulse", pl.info}});
  }

  void lindblad() {
    const ControlProblem p = problem_at(cfg_.total_time);
    Pulse pl = pulse(p);
    const double closed = schedule_fidelity(p, *pl.schedule);
    auto sum = build_sector_sum_basis(cfg_.lattice);
    const DensityMatrix rho0 = DensityMatrix::pure(sum, p.psi0);
    const double dt = cfg_.lindblad_dt > 0.0 ? cfg_.lindblad_dt : p.report_dt();
    LindbladOptions opts;
    opts.sample_every = cfg_.sample_every;
    log_ << "integrating master equation (" << sum->dim() << " states)\n";
    const LindbladResult open =
        evolve_lindblad(rho0, *pl.schedule, cfg_.rates, p.total_time(), dt, p.psi_target, cfg_.initial.delta, opts);
    opts.sample_every = 0;
    const LindbladResult zero = evolve_lindblad(rho0, *pl.schedule, DecoherenceRates{}, p.total_time(), dt,
                                                p.psi_target, cfg_.initial.delta, opts);
    std::ostringstream os;
    os << "t,trace,excitation_number,fidelity\n" << std::setprecision(17);
    for (std::size_t k = 0; k < open.times.size(); ++k)
      os << open.times[k] << ',' << open.trace_vs_t[k] << ',' << open.excitation_vs_t[k] << ','
         << open.fidelity_vs_t[k] << '\n';
    out_.csv("lindblad.csv", os.str());
    out_.json_file("report.json",
                   {{"total_time", p.total_time()},
                    {"total_time_over_pi", p.total_time() / std::numbers::pi},
                    {"dt", dt},
                    {"rates", {{"kappa", cfg_.rates.kappa}, {"gamma", cfg_.rates.gamma}, {"gamma_d", cfg_.rates.gamma_d}}},
                    {"closed_fidelity", closed},
                    {"open_fidelity", open.fidelity},
                    {"zero_rate_fidelity", zero.fidelity},
                    {"fidelity_drop", closed - open.fidelity},
                    {"zero_rate_deviation", std::abs(zero.fidelity - closed)},
                    {"max_trace_drift", open.max_trace_drift},
                    {"max_hermiticity_error", open.max_hermiticity_error},
                    {"min_eigenvalue", open.min_eigenvalue},
                    {"final_excitation_number", open.rho.excitation_number()},
                    {"pulse", pl.info}});
  }

  const RunConfig& cfg_;
  std::ostream& log_;
  Artifacts out_;
  std::string sub_;
  BasisPtr basis_;
  std::optional<CrabParams> loaded_;
  std::optional<ControlProblem> base_;
};

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log) {
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  Runner r(cfg, log, subcommand);
  return r.dispatch();
}

int run_main(const std::string& subcommand, const fs::path& config_path, const Overrides& o, std::ostream& log) {
  try {
    const RunConfig cfg = apply_overrides(load_config(config_path), o);
    return run(subcommand, cfg, log);
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const AccuracyError& e) {
    log << "numerical accuracy failure: " << e.what() << '\n';
    return kAccuracyFailure;
  } catch (const DegenerateGroundState& e) {
    log << "numerical accuracy failure: " << e.what() << '\n';
    return kAccuracyFailure;
  } catch (const std::domain_error& e) {
    log << "numerical accuracy failure: " << e.what() << '\n';
    return kAccuracyFailure;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace jcqoc::app
