#include "jcqoc/lindblad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "jcqoc/errors.hpp"
#include "jcqoc/model.hpp"

namespace jcqoc {

void DecoherenceRates::validate() const {
  for (double r : {kappa, gamma, gamma_d})
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("decoherence rates must be >= 0");
}

DecoherenceRates reference_rates() { return {5e-5, 5e-5 / std::numbers::pi, 0.0}; }

SectorSumBasis::SectorSumBasis(const LatticeConfig& config) : config_(config) {
  if (config.n_excitations < 0) throw ConfigError("sector sum: n_excitations must be >= 0");
  for (int m = 0; m <= config.n_excitations; ++m) {
    offsets_.push_back(dim_);
    sectors_.push_back(enumerate_sector(config, m));
    dim_ += sectors_.back()->dim();
  }
}

SectorSumPtr build_sector_sum_basis(const LatticeConfig& config) {
  return std::make_shared<const SectorSumBasis>(config);
}

DensityMatrix::DensityMatrix(SectorSumPtr basis, Eigen::MatrixXcd matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  const auto d = static_cast<Eigen::Index>(basis_->dim());
  if (matrix_.rows() != d || matrix_.cols() != d)
    throw std::invalid_argument("DensityMatrix: size does not match basis");
}

namespace {

std::size_t embed_offset(const SectorSumBasis& basis, const StateVector& psi) {
  const int m = psi.basis()->sector();
  if (m > basis.max_excitation() || !basis.sector(m)->same_as(*psi.basis()))
    throw std::invalid_argument("state sector is not part of the direct-sum basis");
  return basis.offset(m);
}

}  // namespace

DensityMatrix DensityMatrix::pure(SectorSumPtr basis, const StateVector& psi) {
  const auto off = static_cast<Eigen::Index>(embed_offset(*basis, psi));
  const auto d = static_cast<Eigen::Index>(basis->dim());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  const auto& v = psi.amplitudes();
  rho.block(off, off, v.size(), v.size()) = v * v.adjoint();
  return DensityMatrix(std::move(basis), std::move(rho));
}

double DensityMatrix::trace() const { return matrix_.trace().real(); }

double DensityMatrix::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

double DensityMatrix::expectation(const StateVector& psi) const {
  const auto off = static_cast<Eigen::Index>(embed_offset(*basis_, psi));
  const auto& v = psi.amplitudes();
  return v.dot(matrix_.block(off, off, v.size(), v.size()) * v).real();
}

double DensityMatrix::excitation_number() const {
  double n = 0.0;
  for (int m = 0; m <= basis_->max_excitation(); ++m) {
    const auto off = static_cast<Eigen::Index>(basis_->offset(m));
    const auto d = static_cast<Eigen::Index>(basis_->sector(m)->dim());
    n += m * matrix_.block(off, off, d, d).trace().real();
  }
  return n;
}

namespace {

struct JumpEntry {
  int to;
  int from;
  double weight;
};

// One jump operator restricted to sector m+1 -> m.
struct Jump {
  double rate;
  std::vector<JumpEntry> entries;
};

struct SectorData {
  BasisPtr basis;
  HamiltonianTemplates templates;
  Eigen::VectorXd diag;    // frequency terms
  Eigen::VectorXd loss;    // kappa * n_photons + gamma * n_qubits
  std::vector<std::uint32_t> qubit_mask;
  std::vector<double> values;  // current off-diagonal H values
  std::vector<Jump> jumps_in;  // jumps from sector m+1 into this sector

  SectorData(BasisPtr b, double omega_c, double omega_z, const DecoherenceRates& rates)
      : basis(b), templates(b) {
    diag = omega_c * templates.photon_number() + omega_z * templates.qubit_number();
    loss = rates.kappa * templates.photon_number() + rates.gamma * templates.qubit_number();
    for (const auto& occ : basis->states()) {
      std::uint32_t mask = 0;
      for (std::size_t j = 0; j < occ.qubits.size(); ++j) mask |= std::uint32_t(occ.qubits[j]) << j;
      qubit_mask.push_back(mask);
    }
    values.assign(templates.merged().csr.nnz(), 0.0);
  }

  void set_couplings(double g, double j) {
    const auto& p = templates.merged();
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = g * p.jc_values[k] - j * p.hop_values[k];
  }

  // Y = H X
  void left_multiply(const Eigen::MatrixXcd& x, Eigen::MatrixXcd& y) const {
    const auto& csr = templates.merged().csr;
    y.resize(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const Complex* xc = x.col(c).data();
      Complex* yc = y.col(c).data();
      for (int r = 0; r < csr.n_rows; ++r) {
        Complex acc = diag[r] * xc[r];
        for (int k = csr.row_ptr[r]; k < csr.row_ptr[r + 1]; ++k) acc += values[k] * xc[csr.col_idx[k]];
        yc[r] = acc;
      }
    }
  }

  // Y = X H (H real symmetric)
  void right_multiply(const Eigen::MatrixXcd& x, Eigen::MatrixXcd& y) const {
    const auto& csr = templates.merged().csr;
    y.resize(x.rows(), x.cols());
    for (int c = 0; c < csr.n_rows; ++c) {
      auto yc = y.col(c);
      yc = diag[c] * x.col(c);
      for (int k = csr.row_ptr[c]; k < csr.row_ptr[c + 1]; ++k) yc += values[k] * x.col(csr.col_idx[k]);
    }
  }
};

std::vector<Jump> jumps_between(const SectorSumBasis& sum, int upper, const DecoherenceRates& rates) {
  const BasisPtr& from = sum.sector(upper);
  const BasisPtr& to = sum.sector(upper - 1);
  std::vector<Jump> out;
  auto add = [&](double rate, LadderKind kind) {
    if (rate == 0.0) return;
    for (int site = 1; site <= from->n_sites(); ++site) {
      const SparseOperator op = ladder_op(from, to, site, kind);
      Jump jump{rate, {}};
      for (int col = 0; col < op.matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(op.matrix, col); it; ++it)
          jump.entries.push_back({static_cast<int>(it.row()), col, it.value().real()});
      out.push_back(std::move(jump));
    }
  };
  add(rates.kappa, LadderKind::annihilate_photon);
  add(rates.gamma, LadderKind::lower_qubit);
  return out;
}

struct BlockKey {
  int row_sector;
  int col_sector;
  auto operator<=>(const BlockKey&) const = default;
};

class MasterEquation {
 public:
  MasterEquation(const SectorSumBasis& sum, const DecoherenceRates& rates, double delta,
                 const Eigen::MatrixXcd& rho0)
      : sum_(sum), rates_(rates) {
    const double omega_c = sum.config().omega_c;
    const double omega_z = omega_c - delta;
    const int top = sum.max_excitation();
    for (int m = 0; m <= top; ++m) sectors_.emplace_back(sum.sector(m), omega_c, omega_z, rates);
    for (int m = 0; m < top; ++m) sectors_[m].jumps_in = jumps_between(sum, m + 1, rates);

    // A block (m, m') is driven only by itself and (m+1, m'+1); keep those
    // reachable from non-zero initial blocks, lower triangle only.
    std::vector<std::vector<bool>> nonzero(top + 1, std::vector<bool>(top + 1, false));
    for (int m = 0; m <= top; ++m)
      for (int mp = 0; mp <= m; ++mp) nonzero[m][mp] = block_view(rho0, m, mp).cwiseAbs().maxCoeff() > 0.0;
    for (int m = top; m >= 0; --m)
      for (int mp = m; mp >= 0; --mp) {
        const bool fed = m < top && mp < top && nonzero[m + 1][mp + 1];
        if (nonzero[m][mp] || fed) {
          nonzero[m][mp] = true;
          keys_.push_back({m, mp});
        }
      }
    std::sort(keys_.begin(), keys_.end(), [](const BlockKey& a, const BlockKey& b) { return b < a; });
    for (std::size_t i = 0; i < keys_.size(); ++i) index_[keys_[i]] = i;
  }

  const std::vector<BlockKey>& keys() const { return keys_; }

  Eigen::MatrixXcd block_view(const Eigen::MatrixXcd& full, int m, int mp) const {
    return full.block(static_cast<Eigen::Index>(sum_.offset(m)), static_cast<Eigen::Index>(sum_.offset(mp)),
                      static_cast<Eigen::Index>(sum_.sector(m)->dim()),
                      static_cast<Eigen::Index>(sum_.sector(mp)->dim()));
  }

  std::vector<Eigen::MatrixXcd> split(const Eigen::MatrixXcd& full) const {
    std::vector<Eigen::MatrixXcd> blocks;
    for (const auto& k : keys_) blocks.push_back(block_view(full, k.row_sector, k.col_sector));
    return blocks;
  }

  Eigen::MatrixXcd join(const std::vector<Eigen::MatrixXcd>& blocks) const {
    const auto d = static_cast<Eigen::Index>(sum_.dim());
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(sum_.offset(keys_[i].row_sector));
      const auto c = static_cast<Eigen::Index>(sum_.offset(keys_[i].col_sector));
      const auto& b = blocks[i];
      full.block(r, c, b.rows(), b.cols()) = b;
      if (keys_[i].row_sector != keys_[i].col_sector) full.block(c, r, b.cols(), b.rows()) = b.adjoint();
    }
    return full;
  }

  void set_couplings(double g, double j) {
    for (auto& s : sectors_) s.set_couplings(g, j);
  }

  void rhs(const std::vector<Eigen::MatrixXcd>& x, std::vector<Eigen::MatrixXcd>& out) {
    out.resize(x.size());
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      const auto [m, mp] = keys_[i];
      const SectorData& row = sectors_[m];
      const SectorData& col = sectors_[mp];
      const Eigen::MatrixXcd& xb = x[i];
      Eigen::MatrixXcd& y = out[i];

      row.left_multiply(xb, hx_);
      if (m == mp) {
        // X Hermitian: X H = (H X)^+.
        y = Complex(0.0, -1.0) * (hx_ - hx_.adjoint());
      } else {
        col.right_multiply(xb, xh_);
        y = Complex(0.0, -1.0) * (hx_ - xh_);
      }

      const bool dephasing = rates_.gamma_d > 0.0;
      for (Eigen::Index c = 0; c < xb.cols(); ++c)
        for (Eigen::Index r = 0; r < xb.rows(); ++r) {
          double damp = -0.5 * (row.loss[r] + col.loss[c]);
          if (dephasing)
            damp -= rates_.gamma_d * std::popcount(row.qubit_mask[r] ^ col.qubit_mask[c]);
          y(r, c) += damp * xb(r, c);
        }

      // Feeding from the block one excitation higher on both sides.
      auto feed = index_.find({m + 1, mp + 1});
      if (feed == index_.end()) continue;
      const Eigen::MatrixXcd& upper = x[feed->second];
      const auto& left_jumps = row.jumps_in;
      const auto& right_jumps = col.jumps_in;
      for (std::size_t q = 0; q < left_jumps.size(); ++q) {
        const Jump& l = left_jumps[q];
        const Jump& rj = right_jumps[q];
        for (const auto& b : rj.entries)
          for (const auto& a : l.entries)
            y(a.to, b.to) += l.rate * a.weight * b.weight * upper(a.from, b.from);
      }
    }
  }

  double trace(const std::vector<Eigen::MatrixXcd>& x) const {
    double t = 0.0;
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i].row_sector == keys_[i].col_sector) t += x[i].trace().real();
    return t;
  }

  double excitation(const std::vector<Eigen::MatrixXcd>& x) const {
    double n = 0.0;
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i].row_sector == keys_[i].col_sector) n += keys_[i].row_sector * x[i].trace().real();
    return n;
  }

  const Eigen::MatrixXcd* block(const std::vector<Eigen::MatrixXcd>& x, int m) const {
    auto it = index_.find({m, m});
    return it == index_.end() ? nullptr : &x[it->second];
  }

 private:
  const SectorSumBasis& sum_;
  DecoherenceRates rates_;
  std::vector<SectorData> sectors_;
  std::vector<BlockKey> keys_;
  std::map<BlockKey, std::size_t> index_;
  Eigen::MatrixXcd hx_, xh_;
};

void axpy(const std::vector<Eigen::MatrixXcd>& x, double a, const std::vector<Eigen::MatrixXcd>& k,
          std::vector<Eigen::MatrixXcd>& out) {
  out.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
}

}  // namespace

LindbladResult evolve_lindblad(const DensityMatrix& rho0, const ControlSchedule& schedule,
                               const DecoherenceRates& rates, double total_time, double dt,
                               const StateVector& target, double delta,
                               const LindbladOptions& options) {
  rates.validate();
  if (!(total_time > 0.0)) throw std::invalid_argument("evolve_lindblad: total_time must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_lindblad: dt must be > 0");
  if (std::abs(schedule.total_time() - total_time) > 1e-12 * std::max(1.0, total_time))
    throw std::invalid_argument("evolve_lindblad: schedule duration differs from total_time");
  if (std::abs(rho0.trace() - 1.0) > 1e-8) throw std::invalid_argument("evolve_lindblad: rho0 trace != 1");
  if (rho0.hermiticity_error() > 1e-10) throw std::invalid_argument("evolve_lindblad: rho0 not Hermitian");

  const SectorSumBasis& sum = *rho0.basis();
  const int target_sector = target.basis()->sector();
  if (target_sector > sum.max_excitation() || !sum.sector(target_sector)->same_as(*target.basis()))
    throw std::invalid_argument("evolve_lindblad: target sector not in basis");

  MasterEquation eq(sum, rates, delta, rho0.matrix());
  const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total_time / dt - 1e-9)));
  const double h = total_time / static_cast<double>(steps);
  std::vector<double> g_nodes(2 * steps + 1), j_nodes(2 * steps + 1);
  schedule.sample_uniform(0.5 * h, g_nodes, j_nodes);

  std::vector<Eigen::MatrixXcd> x = eq.split(rho0.matrix());
  std::vector<Eigen::MatrixXcd> k1, k2, k3, k4, tmp;

  LindbladResult result{rho0, 0.0, 0.0, 0.0, 0.0, {}, {}, {}, {}};
  const auto& v = target.amplitudes();
  auto fidelity_now = [&] {
    const Eigen::MatrixXcd* b = eq.block(x, target_sector);
    return b ? v.dot(*b * v).real() : 0.0;
  };
  auto record = [&](std::size_t n) {
    result.times.push_back(n == steps ? total_time : static_cast<double>(n) * h);
    result.trace_vs_t.push_back(eq.trace(x));
    result.excitation_vs_t.push_back(eq.excitation(x));
    result.fidelity_vs_t.push_back(fidelity_now());
  };

  record(0);
  for (std::size_t n = 0; n < steps; ++n) {
    const std::size_t node = 2 * n;
    eq.set_couplings(g_nodes[node], j_nodes[node]);
    eq.rhs(x, k1);
    eq.set_couplings(g_nodes[node + 1], j_nodes[node + 1]);
    axpy(x, 0.5 * h, k1, tmp);
    eq.rhs(tmp, k2);
    axpy(x, 0.5 * h, k2, tmp);
    eq.rhs(tmp, k3);
    eq.set_couplings(g_nodes[node + 2], j_nodes[node + 2]);
    axpy(x, h, k3, tmp);
    eq.rhs(tmp, k4);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double drift = std::abs(eq.trace(x) - 1.0);
    result.max_trace_drift = std::max(result.max_trace_drift, drift);
    if (drift > options.trace_tolerance)
      throw AccuracyError("evolve_lindblad: trace drift " + std::to_string(drift) +
                          " exceeds tolerance; reduce the time step");
    const bool last = n + 1 == steps;
    if (last || (options.sample_every > 0 && (n + 1) % options.sample_every == 0)) record(n + 1);
  }

  result.rho = DensityMatrix(rho0.basis(), eq.join(x));
  result.fidelity = fidelity_now();
  result.max_hermiticity_error = result.rho.hermiticity_error();
  if (options.check_positivity) {
    result.min_eigenvalue = result.rho.min_eigenvalue();
    if (result.min_eigenvalue < -options.positivity_tolerance)
      throw AccuracyError("evolve_lindblad: density matrix lost positivity (min eigenvalue " +
                          std::to_string(result.min_eigenvalue) + ")");
  }
  return result;
}

}  // namespace jcqoc
