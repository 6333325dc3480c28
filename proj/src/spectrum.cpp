#include "jcqoc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "jcqoc/errors.hpp"

namespace jcqoc {

StateVector::StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_->dim())
    throw std::invalid_argument("StateVector: amplitude count does not match basis");
  const double norm = amplitudes_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw std::invalid_argument("StateVector: cannot normalize");
  amplitudes_ /= norm;
}

Complex StateVector::amplitude(const Occupation& occ) const {
  const long i = basis_->find(occ);
  return i < 0 ? Complex(0.0) : amplitudes_[i];
}

Eigen::VectorXcd canonical_phase(Eigen::VectorXcd v) {
  if (v.size() == 0) return v;
  const double max_abs = v.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) return v;
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= max_abs - 1e-12) {
      pivot = i;
      break;
    }
  }
  const Complex phase = std::conj(v[pivot]) / std::abs(v[pivot]);
  v *= phase;
  v[pivot] = Complex(v[pivot].real(), 0.0);
  return v;
}

GroundState ground_state(const SparseOperator& h, double degeneracy_tol) {
  if (!h.is_square()) throw std::invalid_argument("ground_state: operator must map a sector to itself");
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
  if (solver.info() != Eigen::Success) throw std::runtime_error("ground_state: eigensolver failed");
  const auto& evals = solver.eigenvalues();
  const double gap = evals.size() > 1 ? evals[1] - evals[0] : std::numeric_limits<double>::infinity();
  if (gap < degeneracy_tol)
    throw DegenerateGroundState("ground_state: lowest level is degenerate (gap " +
                                    std::to_string(gap) + ")",
                                gap);
  Eigen::VectorXcd v = canonical_phase(solver.eigenvectors().col(0));
  return {evals[0], StateVector(h.rows, std::move(v)), gap};
}

namespace {

void require_same_basis(const StateVector& a, const StateVector& b) {
  if (!a.basis()->same_as(*b.basis()))
    throw std::invalid_argument("states live on different sector bases");
}

}  // namespace

double fidelity(const StateVector& a, const StateVector& b) {
  require_same_basis(a, b);
  const double f = std::norm(a.amplitudes().dot(b.amplitudes()));
  return std::clamp(f, 0.0, 1.0);
}

double bures_angle(const StateVector& a, const StateVector& b) {
  require_same_basis(a, b);
  const double overlap = std::abs(a.amplitudes().dot(b.amplitudes()));
  return std::acos(std::clamp(overlap, 0.0, 1.0));
}

Complex photon_correlator(const StateVector& psi, int i, int j) {
  const auto& basis = psi.basis();
  if (basis->sector() == 0) return Complex(0.0);
  const BasisPtr lower = enumerate_sector(basis->config(), basis->sector() - 1);
  const auto ai = ladder_op(basis, lower, i, LadderKind::annihilate_photon);
  const auto aj = ladder_op(basis, lower, j, LadderKind::annihilate_photon);
  const Eigen::VectorXcd ai_psi = ai.matrix * psi.amplitudes();
  const Eigen::VectorXcd aj_psi = aj.matrix * psi.amplitudes();
  return ai_psi.dot(aj_psi);
}

Complex spdm(const StateVector& psi, int i, int j) {
  const Complex density = photon_correlator(psi, i, i);
  if (density.real() < 1e-12)
    throw std::domain_error("spdm: photon density at site " + std::to_string(i) + " is zero");
  return photon_correlator(psi, i, j) / density.real();
}

namespace {

void require_unit_filling(const SectorBasis& basis, const char* who) {
  if (basis.sector() != basis.n_sites())
    throw std::invalid_argument(std::string(who) + ": requires unit filling (m == N)");
}

}  // namespace

StateVector analytic_sf_state(const BasisPtr& basis) {
  require_unit_filling(*basis, "analytic_sf_state");
  const int n = basis->n_sites();
  if (basis->config().fock_cutoff < n)
    throw std::invalid_argument("analytic_sf_state: fock_cutoff must be >= N");
  // Multinomial expansion of (sum_j a_j^+)^N / (N^{N/2} sqrt(N!)):
  // amplitude sqrt(N!) / (N^{N/2} prod_j sqrt(n_j!)).
  const double log_prefactor = 0.5 * std::lgamma(n + 1.0) - 0.5 * n * std::log(static_cast<double>(n));
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dim()));
  for (std::size_t k = 0; k < basis->dim(); ++k) {
    const auto& occ = basis->state(k);
    if (std::any_of(occ.qubits.begin(), occ.qubits.end(), [](auto s) { return s != 0; })) continue;
    double log_amp = log_prefactor;
    for (auto nj : occ.photons) log_amp -= 0.5 * std::lgamma(nj + 1.0);
    amps[static_cast<Eigen::Index>(k)] = std::exp(log_amp);
  }
  return StateVector(basis, std::move(amps));
}

StateVector analytic_mi_state(const BasisPtr& basis, double g, double delta) {
  require_unit_filling(*basis, "analytic_mi_state");
  const double theta = jc_analytic(1, g, delta, basis->config().omega_c).theta;
  // |1,-> = sin(theta/2)|1,down> - cos(theta/2)|0,up>; the relative sign flips with g.
  const double photon_amp = std::sin(0.5 * theta);
  const double qubit_amp = -(g < 0.0 ? -1.0 : 1.0) * std::cos(0.5 * theta);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dim()));
  for (std::size_t k = 0; k < basis->dim(); ++k) {
    const auto& occ = basis->state(k);
    double amp = 1.0;
    for (int j = 0; j < basis->n_sites() && amp != 0.0; ++j) {
      const int nj = occ.photons[j], sj = occ.qubits[j];
      if (nj == 1 && sj == 0)
        amp *= photon_amp;
      else if (nj == 0 && sj == 1)
        amp *= qubit_amp;
      else
        amp = 0.0;
    }
    amps[static_cast<Eigen::Index>(k)] = amp;
  }
  return StateVector(basis, std::move(amps));
}

}  // namespace jcqoc
