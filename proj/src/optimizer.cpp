#include "jcqoc/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "jcqoc/errors.hpp"
#include "jcqoc/parallel.hpp"

namespace jcqoc {

ControlProblem ControlProblem::with_time(double total_time) const {
  ControlProblem p = *this;
  p.ramp.total_time = total_time;
  p.ramp.validate();
  return p;
}

ControlProblem ControlProblem::with_constraints(const Constraints& c) const {
  ControlProblem p = *this;
  p.constraints = c;
  p.constraints.validate();
  return p;
}

SchedulePtr ControlProblem::schedule(const CrabParams& params) const {
  return std::make_shared<const CrabSchedule>(ramp, params, constraints, convention);
}

SchedulePtr ControlProblem::adiabatic_schedule() const {
  return std::make_shared<const RampSchedule>(ramp);
}

ControlProblem ControlProblem::ground_state_transfer(const BasisPtr& basis,
                                                     const Couplings& initial,
                                                     const Couplings& target,
                                                     const Constraints& constraints,
                                                     double total_time,
                                                     AngularConvention convention) {
  if (initial.delta != target.delta)
    throw ConfigError("control problem: detuning is held fixed; initial and target delta must match");
  auto model = std::make_shared<const HamiltonianModel>(basis, initial.delta);
  const GroundState g0 = ground_state(model->at({initial.g, initial.j_hop}));
  const GroundState gt = ground_state(model->at({target.g, target.j_hop}));
  RampSpec ramp{initial.g, target.g, initial.j_hop, target.j_hop, total_time};
  ramp.validate();
  constraints.validate();
  return ControlProblem{model, ramp, constraints, convention, g0.psi, gt.psi};
}

double cost(const CrabParams& params, const ControlProblem& problem) {
  const CrabSchedule schedule(problem.ramp, params, problem.constraints, problem.convention);
  const StateVector psi = evolve_final(*problem.model, problem.psi0, schedule,
                                       problem.total_time(), problem.optimizer_dt(),
                                       problem.optimizer_norm_tolerance);
  return 1.0 - fidelity(psi, problem.psi_target);
}

double schedule_fidelity(const ControlProblem& problem, const ControlSchedule& schedule,
                         double* dt_used, int max_refinements) {
  double dt = problem.report_dt();
  for (int attempt = 0;; ++attempt) {
    try {
      const StateVector psi =
          evolve_final(*problem.model, problem.psi0, schedule, problem.total_time(), dt);
      if (dt_used) *dt_used = dt;
      return fidelity(psi, problem.psi_target);
    } catch (const AccuracyError&) {
      if (attempt >= max_refinements) throw;
      dt *= 0.5;
    }
  }
}

double pulse_fidelity(const CrabParams& params, const ControlProblem& problem, double* dt_used) {
  const CrabSchedule schedule(problem.ramp, params, problem.constraints, problem.convention);
  return schedule_fidelity(problem, schedule, dt_used);
}

double adiabatic_fidelity(const ControlProblem& problem, double* dt_used) {
  const RampSchedule schedule(problem.ramp);
  return schedule_fidelity(problem, schedule, dt_used);
}

CrabParams random_params(std::uint64_t seed, const InitDistribution& dist) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-dist.coef_range, dist.coef_range);
  std::uniform_real_distribution<double> offset(-dist.offset_range, dist.offset_range);
  CrabParams p;
  for (auto* row : {&p.c1, &p.c2, &p.d1, &p.d2})
    for (auto& v : *row) v = coef(rng);
  for (auto* row : {&p.dw1, &p.dw2})
    for (auto& v : *row) v = offset(rng);
  return p;
}

OptimizationReport optimize_from(const ControlProblem& problem, const CrabParams& start,
                                 const PulseOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  NelderMeadOptions nm = options.nelder_mead;
  if (options.stop_at_threshold) {
    // Small margin so the report-precision fidelity also clears the threshold.
    const double target = 1.0 - options.threshold_fidelity - 1e-6;
    nm.target_value = nm.target_value ? std::max(*nm.target_value, target) : target;
  }
  const Objective objective = [&](std::span<const double> x) {
    return cost(CrabParams::from_flat(x), problem);
  };
  const NelderMeadResult r = nelder_mead(objective, start.flat(), nm);

  OptimizationReport report;
  report.best_params = CrabParams::from_flat(r.x_best);
  report.optimizer_fidelity = 1.0 - r.f_best;
  report.best_fidelity = pulse_fidelity(report.best_params, problem, &report.report_dt);
  report.iterations_used = r.iterations;
  report.evaluations = r.evaluations;
  report.converged = r.converged;
  report.success = report.best_fidelity >= options.threshold_fidelity;
  report.fidelity_history.reserve(r.history.size());
  for (double c : r.history) report.fidelity_history.push_back(1.0 - c);
  report.restarts_run = 1;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

OptimizationReport optimize_pulse(const ControlProblem& problem, const PulseOptions& options) {
  if (options.restarts < 1) throw ConfigError("optimize_pulse: restarts must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t batch = std::max<std::size_t>(1, options.workers);

  std::vector<OptimizationReport> runs;
  runs.reserve(options.restarts);
  std::size_t stop_at = options.restarts;
  for (std::size_t first = 0; first < stop_at; first += batch) {
    const std::size_t count = std::min(batch, stop_at - first);
    std::vector<OptimizationReport> chunk(count);
    parallel_for(count, options.workers, [&](std::size_t k) {
      const std::uint64_t seed = options.seed + first + k;
      chunk[k] = optimize_from(problem, random_params(seed, options.init), options);
      chunk[k].restart_index = first + k;
      chunk[k].restart_seed = seed;
    });
    for (auto& r : chunk) {
      const bool ok = r.success;
      runs.push_back(std::move(r));
      if (ok && options.stop_after_success) {
        stop_at = runs.size();
        break;
      }
    }
  }

  // Best fidelity wins; ties go to the lower restart index.
  auto best = std::max_element(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return a.best_fidelity < b.best_fidelity;
  });
  OptimizationReport out = std::move(*best);
  out.restarts_run = runs.size();
  for (const auto& r : runs) {
    if (&r == &*best) continue;
    out.evaluations += r.evaluations;
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ThresholdResult threshold_time(const ControlProblem& problem, std::span<const double> t_grid,
                               const PulseOptions& options, const ThresholdOptions& threshold) {
  if (t_grid.empty()) throw ConfigError("threshold_time: empty time grid");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
      std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end())
    throw ConfigError("threshold_time: time grid must be strictly increasing");

  ThresholdResult result;
  result.threshold_fidelity = options.threshold_fidelity;
  auto run = [&](double t) -> const ScanPoint& {
    OptimizationReport r = optimize_pulse(problem.with_time(t), options);
    const bool ok = r.success;
    const double f = r.best_fidelity;
    result.scan_points.push_back({t, f, ok, std::move(r)});
    return result.scan_points.back();
  };

  std::optional<double> last_fail;
  std::optional<ScanPoint> first_success;
  for (double t : t_grid) {
    const ScanPoint& p = run(t);
    if (p.success) {
      first_success = p;
      break;
    }
    last_fail = t;
  }

  if (!first_success) {
    auto best = std::max_element(
        result.scan_points.begin(), result.scan_points.end(),
        [](const auto& a, const auto& b) { return a.best_fidelity < b.best_fidelity; });
    result.at_threshold = *best;
    return result;
  }

  ScanPoint hi = *first_success;
  if (last_fail && threshold.refine_step > 0.0) {
    double lo = *last_fail;
    while (hi.total_time - lo > threshold.refine_step * (1.0 + 1e-9)) {
      // Midpoint snapped to the refinement lattice anchored at lo.
      const double steps = std::floor((hi.total_time - lo) / threshold.refine_step / 2.0);
      const double mid = lo + std::max(1.0, steps) * threshold.refine_step;
      if (mid >= hi.total_time - 1e-12) break;
      const ScanPoint& p = run(mid);
      if (p.success)
        hi = p;
      else
        lo = mid;
    }
  }
  result.found = true;
  result.t_threshold = hi.total_time;
  result.at_threshold = hi;
  return result;
}

std::vector<NoisePoint> noise_robustness(const ControlProblem& problem, const CrabParams& params,
                                         std::span<const double> sigmas, std::size_t n_samples,
                                         std::uint64_t seed, int grid_points,
                                         std::size_t workers) {
  if (n_samples < 1) throw ConfigError("noise_robustness: n_samples must be >= 1");
  const SchedulePtr base = problem.schedule(params);
  std::vector<NoisePoint> out;
  out.reserve(sigmas.size());
  for (double sigma : sigmas) {
    std::vector<double> f(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
      const SchedulePtr noisy = apply_noise(base, NoiseSpec{sigma, grid_points, seed + i});
      f[i] = schedule_fidelity(problem, *noisy);
    });
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double v : f) var += (v - mean) * (v - mean);
    const double std_dev = n_samples > 1 ? std::sqrt(var / static_cast<double>(n_samples - 1)) : 0.0;
    out.push_back({sigma, mean, std_dev, n_samples});
  }
  return out;
}

}  // namespace jcqoc
