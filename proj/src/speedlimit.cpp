#include "jcqoc/speedlimit.hpp"

#include <cmath>
#include <stdexcept>

namespace jcqoc {

QslEstimate estimate_qsl(const StateVector& psi0, const StateVector& target, double delta_e_ave) {
  if (!std::isfinite(delta_e_ave) || !(delta_e_ave > 0.0))
    throw std::domain_error("estimate_qsl: average energy spread must be > 0");
  const double d = bures_angle(psi0, target);
  return {d, delta_e_ave, d / delta_e_ave};
}

QslEstimate estimate_qsl(const StateVector& psi0, const StateVector& target, const Trajectory& traj) {
  return estimate_qsl(psi0, target, traj.delta_e_ave);
}

}  // namespace jcqoc
