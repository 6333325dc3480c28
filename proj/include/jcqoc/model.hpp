#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "jcqoc/fockspace.hpp"

namespace jcqoc {

/// Qubit-cavity coupling g, photon hopping J and detuning delta = omega_c - omega_z.
struct Couplings {
  double g = 0.0;
  double j_hop = 0.0;
  double delta = 0.0;
};

/// H0 = sum_j [omega_c a_j^+ a_j + omega_z (sz_j + 1)/2 + g (a_j^+ s-_j + s+_j a_j)].
/// omega_c is taken from the basis config, omega_z = omega_c - couplings.delta.
SparseOperator build_h0(const BasisPtr& basis, const Couplings& couplings);

/// H_int = -J sum_j (a_j^+ a_{j+1} + h.c.) with a_{N+1} = a_1.
SparseOperator build_hint(const BasisPtr& basis, double j_hop);

SparseOperator build_ht(const BasisPtr& basis, const Couplings& couplings);

struct JcLevels {
  double e_plus;
  double e_minus;
  double theta;
};

/// Polariton doublet of a single JC cell with n excitations.
/// Throws for n < 1 or when the mixing angle is undefined (g = delta = 0).
JcLevels jc_analytic(int n, double g, double delta, double omega_c);

/// Real-valued CSR matrix; all Hamiltonian pieces in the Fock basis are real.
struct RealCsr {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;

  static RealCsr from_sparse(const Eigen::SparseMatrix<Complex>& m);
  std::size_t nnz() const { return values.size(); }
};

/// The coefficient-independent pieces of H_t on one sector. H_t is formed as
///   omega_c * photon_number + omega_z * qubit_number + g * jc_coupling - J * hopping
/// so only the scalar coefficients change from one time step to the next.
class HamiltonianTemplates {
 public:
  explicit HamiltonianTemplates(BasisPtr basis);

  const BasisPtr& basis() const { return basis_; }
  std::size_t dim() const { return basis_->dim(); }

  const Eigen::VectorXd& photon_number() const { return photon_number_; }
  const Eigen::VectorXd& qubit_number() const { return qubit_number_; }

  /// Sum over sites of a^+ s- + s+ a.
  const SparseOperator& jc_coupling() const { return jc_coupling_; }
  /// Sum over bonds of a_j^+ a_{j+1} + h.c. (no -J prefactor).
  const SparseOperator& hopping() const { return hopping_; }

  SparseOperator assemble(double omega_c, double omega_z, double g, double j_hop) const;

  /// Shared sparsity pattern of jc_coupling and hopping with separate value
  /// arrays, so that g*A - J*B is one pass over the pattern.
  struct MergedPattern {
    RealCsr csr;
    std::vector<double> jc_values;
    std::vector<double> hop_values;
  };
  const MergedPattern& merged() const { return merged_; }

 private:
  BasisPtr basis_;
  Eigen::VectorXd photon_number_;
  Eigen::VectorXd qubit_number_;
  SparseOperator jc_coupling_;
  SparseOperator hopping_;
  MergedPattern merged_;
};

}  // namespace jcqoc
