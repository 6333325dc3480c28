#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "jcqoc/controls.hpp"
#include "jcqoc/model.hpp"
#include "jcqoc/spectrum.hpp"

namespace jcqoc {

/// H(t) on one sector: fixed frequencies plus the schedule's g(t), J(t).
class HamiltonianModel {
 public:
  /// omega_c from the basis config, omega_z = omega_c - delta.
  HamiltonianModel(std::shared_ptr<const HamiltonianTemplates> templates, double delta);
  HamiltonianModel(const BasisPtr& basis, double delta);

  const HamiltonianTemplates& templates() const { return *templates_; }
  const BasisPtr& basis() const { return templates_->basis(); }
  double omega_c() const { return omega_c_; }
  double omega_z() const { return omega_z_; }

  SparseOperator at(const ControlValues& v) const;
  /// Diagonal of H (frequency terms only).
  const Eigen::VectorXd& diagonal() const { return diagonal_; }

 private:
  std::shared_ptr<const HamiltonianTemplates> templates_;
  double omega_c_;
  double omega_z_;
  Eigen::VectorXd diagonal_;
};

struct EvolveOptions {
  /// Record fidelity/energy samples every this many steps (plus t = T).
  std::size_t sample_every = 10;
  bool track_energy = true;
  bool record_states = false;
  /// Fidelity is recorded against this state when set.
  std::optional<StateVector> target;
  double norm_tolerance = 1e-8;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> g_vs_t;
  std::vector<double> j_vs_t;
  std::vector<double> fidelity_vs_t;
  std::vector<double> delta_e_vs_t;
  std::vector<StateVector> states;
  double delta_e_ave = 0.0;
  double total_time = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  double norm_drift = 0.0;
  std::optional<StateVector> final_state;
};

/// Number of RK4 steps used for a requested dt (T is split evenly).
std::size_t step_count(double total_time, double dt);

/// Integrates i d/dt psi = H(t) psi with classical RK4 at fixed step,
/// sampling H at the stage nodes. No renormalization; throws AccuracyError
/// when the final norm drifts by more than options.norm_tolerance.
Trajectory evolve(const HamiltonianModel& model, const StateVector& psi0,
                  const ControlSchedule& schedule, double total_time, double dt,
                  const EvolveOptions& options = {});

/// Same integration, returning only the final state (the optimizer's path).
StateVector evolve_final(const HamiltonianModel& model, const StateVector& psi0,
                         const ControlSchedule& schedule, double total_time, double dt,
                         double norm_tolerance = 1e-8);

/// sqrt(<H^2> - <H>^2), clamped at zero.
double energy_fluctuation(const StateVector& psi, const SparseOperator& h);

/// (1/T) * trapezoidal integral of `values` over `times`.
double trapezoid_average(std::span<const double> times, std::span<const double> values);

double average_energy_fluctuation(const Trajectory& traj);

/// Columns t,g,J,fidelity,delta_e.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace jcqoc
