#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "jcqoc/controls.hpp"
#include "jcqoc/nelder_mead.hpp"
#include "jcqoc/propagate.hpp"
#include "jcqoc/spectrum.hpp"

namespace jcqoc {

/// Everything needed to score a pulse: sector Hamiltonian, boundary
/// couplings, constraints, initial and target states, and time grid.
struct ControlProblem {
  std::shared_ptr<const HamiltonianModel> model;
  RampSpec ramp;
  Constraints constraints;
  AngularConvention convention = AngularConvention::literal;
  StateVector psi0;
  StateVector psi_target;
  /// Integration steps per unit T: dt = T / optimizer_steps on the cost path.
  std::size_t optimizer_steps = 2000;
  /// dt = T / report_steps for every reported number.
  std::size_t report_steps = 4000;
  /// Sanity bound on the cost path; reported values use 1e-8.
  double optimizer_norm_tolerance = 1e-2;

  double total_time() const { return ramp.total_time; }
  double optimizer_dt() const { return ramp.total_time / static_cast<double>(optimizer_steps); }
  double report_dt() const { return ramp.total_time / static_cast<double>(report_steps); }

  /// Copy with a different total evolution time.
  ControlProblem with_time(double total_time) const;
  ControlProblem with_constraints(const Constraints& c) const;

  SchedulePtr schedule(const CrabParams& params) const;
  SchedulePtr adiabatic_schedule() const;

  /// Ground states of the initial and target couplings on `basis`.
  static ControlProblem ground_state_transfer(const BasisPtr& basis, const Couplings& initial,
                                              const Couplings& target,
                                              const Constraints& constraints, double total_time,
                                              AngularConvention convention = AngularConvention::literal);
};

/// 1 - |<psi(T)|psi_T>|^2 at the optimizer step.
double cost(const CrabParams& params, const ControlProblem& problem);

/// Final fidelity of an arbitrary schedule at report precision. On a norm
/// drift failure the step is halved (up to `max_refinements` times); the
/// step actually used is written to `dt_used` when non-null.
double schedule_fidelity(const ControlProblem& problem, const ControlSchedule& schedule,
                         double* dt_used = nullptr, int max_refinements = 3);

double pulse_fidelity(const CrabParams& params, const ControlProblem& problem,
                      double* dt_used = nullptr);
double adiabatic_fidelity(const ControlProblem& problem, double* dt_used = nullptr);

/// Uniform initial draw: c, d in [-coef_range, coef_range], dw in
/// [-offset_range, offset_range].
struct InitDistribution {
  double coef_range = 1.0;
  double offset_range = 0.5;
};

CrabParams random_params(std::uint64_t seed, const InitDistribution& dist = {});

struct PulseOptions {
  NelderMeadOptions nelder_mead;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  double threshold_fidelity = 0.99;
  /// Stop each Nelder-Mead run once the threshold fidelity is reached.
  bool stop_at_threshold = false;
  /// Stop launching restarts after the first successful one.
  bool stop_after_success = true;
  InitDistribution init;
  std::size_t workers = 1;
};

struct OptimizationReport {
  CrabParams best_params;
  /// Fidelity at report precision.
  double best_fidelity = 0.0;
  /// Fidelity seen by the optimizer (coarser step).
  double optimizer_fidelity = 0.0;
  double report_dt = 0.0;
  std::size_t iterations_used = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  bool success = false;
  std::size_t restart_index = 0;
  std::uint64_t restart_seed = 0;
  std::size_t restarts_run = 0;
  /// Best fidelity after each simplex update of the winning run.
  std::vector<double> fidelity_history;
  double wall_time = 0.0;
};

/// Runs Nelder-Mead from `restarts` random draws (seed + index) and returns
/// the best run. Restarts are taken in index order; with
/// stop_after_success the search ends at the first successful index.
/// Parallel and serial execution give identical reports.
OptimizationReport optimize_pulse(const ControlProblem& problem, const PulseOptions& options);

/// Single run from a given starting point.
OptimizationReport optimize_from(const ControlProblem& problem, const CrabParams& start,
                                 const PulseOptions& options);

struct ScanPoint {
  double total_time;
  double best_fidelity;
  bool success;
  OptimizationReport report;
};

struct ThresholdResult {
  bool found = false;
  double t_threshold = 0.0;
  double threshold_fidelity = 0.99;
  /// All evaluated points, in evaluation order.
  std::vector<ScanPoint> scan_points;
  /// The scan point at t_threshold (or the best point when not found).
  std::optional<ScanPoint> at_threshold;
};

struct ThresholdOptions {
  /// Bisection resolution between the last failing and first successful
  /// grid points; 0 disables refinement.
  double refine_step = 0.0;
};

/// Walks `t_grid` upward until optimize_pulse succeeds, then bisects down to
/// refine_step. Returns found = false with the best point if no grid time
/// succeeds.
ThresholdResult threshold_time(const ControlProblem& problem, std::span<const double> t_grid,
                               const PulseOptions& options, const ThresholdOptions& threshold = {});

struct NoisePoint {
  double sigma;
  double mean_fidelity;
  double std_fidelity;
  std::size_t n_samples;
};

/// For each sigma, averages the final fidelity over n_samples noisy copies of
/// the optimized schedule. Sample i uses seed + i for every sigma, so the
/// realizations differ only in scale between sigma values.
std::vector<NoisePoint> noise_robustness(const ControlProblem& problem, const CrabParams& params,
                                         std::span<const double> sigmas, std::size_t n_samples,
                                         std::uint64_t seed, int grid_points = 100,
                                         std::size_t workers = 1);

}  // namespace jcqoc
