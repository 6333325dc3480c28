#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "jcqoc/controls.hpp"
#include "jcqoc/fockspace.hpp"
#include "jcqoc/spectrum.hpp"

namespace jcqoc {

struct DecoherenceRates {
  double kappa = 0.0;    ///< cavity decay
  double gamma = 0.0;    ///< qubit decay
  double gamma_d = 0.0;  ///< pure dephasing (optional term)

  void validate() const;
};

/// Rates for g = 2 pi x 100 MHz: cavity Q = 1e6 at 5 GHz, qubit T1 = 100 us.
DecoherenceRates reference_rates();

/// Direct sum of the sectors m = 0..M; decay never leaves this space.
class SectorSumBasis {
 public:
  explicit SectorSumBasis(const LatticeConfig& config);

  int max_excitation() const { return static_cast<int>(sectors_.size()) - 1; }
  const BasisPtr& sector(int m) const { return sectors_.at(static_cast<std::size_t>(m)); }
  std::size_t offset(int m) const { return offsets_.at(static_cast<std::size_t>(m)); }
  std::size_t dim() const { return dim_; }
  const LatticeConfig& config() const { return config_; }

 private:
  LatticeConfig config_;
  std::vector<BasisPtr> sectors_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
};

using SectorSumPtr = std::shared_ptr<const SectorSumBasis>;

SectorSumPtr build_sector_sum_basis(const LatticeConfig& config);

class DensityMatrix {
 public:
  DensityMatrix(SectorSumPtr basis, Eigen::MatrixXcd matrix);
  /// |psi><psi| embedded in its sector.
  static DensityMatrix pure(SectorSumPtr basis, const StateVector& psi);

  const SectorSumPtr& basis() const { return basis_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  double trace() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// <psi|rho|psi> for a state in one of the sectors.
  double expectation(const StateVector& psi) const;
  /// <sum_j a_j^+ a_j + (sz_j + 1)/2>.
  double excitation_number() const;

 private:
  SectorSumPtr basis_;
  Eigen::MatrixXcd matrix_;
};

struct LindbladOptions {
  double trace_tolerance = 1e-6;
  /// Record trace/excitation/fidelity every this many steps; 0 records only the ends.
  std::size_t sample_every = 0;
  bool check_positivity = true;
  double positivity_tolerance = 1e-8;
};

struct LindbladResult {
  DensityMatrix rho;
  double fidelity;
  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  std::vector<double> times;
  std::vector<double> trace_vs_t;
  std::vector<double> excitation_vs_t;
  std::vector<double> fidelity_vs_t;
};

/// RK4 integration of the master equation with cavity/qubit decay (and
/// optional dephasing) under H(t) from `schedule`, detuning `delta`.
/// Throws AccuracyError on trace drift beyond options.trace_tolerance or a
/// negative eigenvalue beyond options.positivity_tolerance.
LindbladResult evolve_lindblad(const DensityMatrix& rho0, const ControlSchedule& schedule,
                               const DecoherenceRates& rates, double total_time, double dt,
                               const StateVector& target, double delta = 0.0,
                               const LindbladOptions& options = {});

}  // namespace jcqoc
