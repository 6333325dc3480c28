#pragma once

#include <Eigen/Dense>

#include "jcqoc/fockspace.hpp"
#include "jcqoc/model.hpp"

namespace jcqoc {

/// Normalized amplitude vector on a sector basis.
class StateVector {
 public:
  /// Normalizes `amplitudes`; throws on a zero vector or size mismatch.
  StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes);

  const BasisPtr& basis() const { return basis_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

  /// Amplitude of a given occupation (zero if absent from the basis).
  Complex amplitude(const Occupation& occ) const;

 private:
  BasisPtr basis_;
  Eigen::VectorXcd amplitudes_;
};

/// Makes the largest-magnitude amplitude real and positive (first index wins
/// among entries equal to the maximum within 1e-12).
Eigen::VectorXcd canonical_phase(Eigen::VectorXcd v);

struct GroundState {
  double energy;
  StateVector psi;
  double gap;  ///< E_1 - E_0; +inf for a one-dimensional sector.
};

/// Dense Hermitian diagonalization. Throws DegenerateGroundState when the gap
/// to the first excited level is below `degeneracy_tol`.
GroundState ground_state(const SparseOperator& h, double degeneracy_tol = 1e-10);

/// |<a|b>|^2.
double fidelity(const StateVector& a, const StateVector& b);

/// arccos |<a|b>|, in [0, pi/2].
double bures_angle(const StateVector& a, const StateVector& b);

/// <a_i^+ a_j> (unnormalized), sites 1-based.
Complex photon_correlator(const StateVector& psi, int i, int j);

/// Single-particle density matrix rho_1(i, j) = <a_i^+ a_j> / <a_i^+ a_i>.
/// Throws std::domain_error when <a_i^+ a_i> < 1e-12.
Complex spdm(const StateVector& psi, int i, int j);

/// All N photons in the k = 0 hopping mode: (a_{k=0}^+)^N |vac> / sqrt(N!).
/// Requires unit filling and fock_cutoff >= N.
StateVector analytic_sf_state(const BasisPtr& basis);

/// Product of single-site lower polaritons |1,-> (J = 0 ground state).
/// Requires unit filling.
StateVector analytic_mi_state(const BasisPtr& basis, double g, double delta);

}  // namespace jcqoc
