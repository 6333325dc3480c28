#pragma once

#include "jcqoc/propagate.hpp"
#include "jcqoc/spectrum.hpp"

namespace jcqoc {

struct QslEstimate {
  double distance;     ///< Bures angle between initial and target
  double delta_e_ave;  ///< time-averaged energy spread
  double t_qsl;        ///< distance / delta_e_ave
};

/// Mandelstam-Tamm style bound from a recorded trajectory. Throws
/// std::domain_error if the averaged spread is zero.
QslEstimate estimate_qsl(const StateVector& psi0, const StateVector& target, const Trajectory& traj);

/// Same, from a precomputed average spread.
QslEstimate estimate_qsl(const StateVector& psi0, const StateVector& target, double delta_e_ave);

}  // namespace jcqoc
