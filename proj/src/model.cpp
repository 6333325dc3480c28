#include "jcqoc/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "jcqoc/errors.hpp"

namespace jcqoc {

namespace {

struct Transition {
  Occupation target;
  double coeff;
};

// a_to^+ a_from applied to one occupation.
std::optional<Transition> photon_move(const Occupation& occ, int to, int from, int cutoff) {
  Occupation out = occ;
  const int n_from = out.photons[from];
  if (n_from == 0) return std::nullopt;
  double coeff = std::sqrt(static_cast<double>(n_from));
  out.photons[from] = static_cast<std::uint8_t>(n_from - 1);
  const int n_to = out.photons[to];
  if (n_to >= cutoff) return std::nullopt;
  coeff *= std::sqrt(static_cast<double>(n_to + 1));
  out.photons[to] = static_cast<std::uint8_t>(n_to + 1);
  return Transition{std::move(out), coeff};
}

SparseOperator jc_coupling_operator(const BasisPtr& basis) {
  const int cutoff = basis->config().fock_cutoff;
  std::vector<SparseOperator::Entry> entries;
  for (std::size_t col = 0; col < basis->dim(); ++col) {
    const Occupation& occ = basis->state(col);
    for (int j = 0; j < basis->n_sites(); ++j) {
      Occupation out = occ;
      const int n = occ.photons[j];
      double coeff = 0.0;
      if (occ.qubits[j] == 1) {
        // a^+ s-
        if (n >= cutoff) continue;
        coeff = std::sqrt(static_cast<double>(n + 1));
        out.photons[j] = static_cast<std::uint8_t>(n + 1);
        out.qubits[j] = 0;
      } else {
        // s+ a
        if (n == 0) continue;
        coeff = std::sqrt(static_cast<double>(n));
        out.photons[j] = static_cast<std::uint8_t>(n - 1);
        out.qubits[j] = 1;
      }
      const long row = basis->find(out);
      if (row >= 0) entries.push_back({static_cast<std::size_t>(row), col, coeff});
    }
  }
  return SparseOperator::from_entries(basis, basis, entries);
}

SparseOperator hopping_operator(const BasisPtr& basis) {
  const int n_sites = basis->n_sites();
  const int cutoff = basis->config().fock_cutoff;
  std::vector<SparseOperator::Entry> entries;
  for (std::size_t col = 0; col < basis->dim(); ++col) {
    const Occupation& occ = basis->state(col);
    for (int j = 0; j < n_sites; ++j) {
      const int next = (j + 1) % n_sites;
      for (auto [to, from] : {std::pair{j, next}, std::pair{next, j}}) {
        auto tr = photon_move(occ, to, from, cutoff);
        if (!tr) continue;
        const long row = basis->find(tr->target);
        if (row >= 0) entries.push_back({static_cast<std::size_t>(row), col, tr->coeff});
      }
    }
  }
  return SparseOperator::from_entries(basis, basis, entries);
}

SparseOperator diagonal_operator(const BasisPtr& basis, const Eigen::VectorXd& diag) {
  std::vector<SparseOperator::Entry> entries;
  for (std::size_t i = 0; i < basis->dim(); ++i)
    if (diag[static_cast<Eigen::Index>(i)] != 0.0)
      entries.push_back({i, i, diag[static_cast<Eigen::Index>(i)]});
  return SparseOperator::from_entries(basis, basis, entries);
}

}  // namespace

HamiltonianTemplates::HamiltonianTemplates(BasisPtr basis)
    : basis_(std::move(basis)),
      jc_coupling_(jc_coupling_operator(basis_)),
      hopping_(hopping_operator(basis_)) {
  const auto dim = static_cast<Eigen::Index>(basis_->dim());
  photon_number_.resize(dim);
  qubit_number_.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& occ = basis_->state(static_cast<std::size_t>(i));
    double np = 0.0, nq = 0.0;
    for (auto n : occ.photons) np += n;
    for (auto s : occ.qubits) nq += s;
    photon_number_[i] = np;
    qubit_number_[i] = nq;
  }

  // Merge the two patterns; values are kept apart.
  const RealCsr a = RealCsr::from_sparse(jc_coupling_.matrix);
  const RealCsr b = RealCsr::from_sparse(hopping_.matrix);
  auto& m = merged_;
  m.csr.n_rows = a.n_rows;
  m.csr.n_cols = a.n_cols;
  m.csr.row_ptr.assign(1, 0);
  for (int r = 0; r < a.n_rows; ++r) {
    std::map<int, std::pair<double, double>> row;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) row[a.col_idx[k]].first += a.values[k];
    for (int k = b.row_ptr[r]; k < b.row_ptr[r + 1]; ++k) row[b.col_idx[k]].second += b.values[k];
    for (const auto& [c, v] : row) {
      m.csr.col_idx.push_back(c);
      m.jc_values.push_back(v.first);
      m.hop_values.push_back(v.second);
    }
    m.csr.row_ptr.push_back(static_cast<int>(m.csr.col_idx.size()));
  }
  m.csr.values.assign(m.csr.col_idx.size(), 0.0);
}

SparseOperator HamiltonianTemplates::assemble(double omega_c, double omega_z, double g,
                                              double j_hop) const {
  Eigen::VectorXd diag = omega_c * photon_number_ + omega_z * qubit_number_;
  SparseOperator h = diagonal_operator(basis_, diag);
  h.matrix += Complex(g) * jc_coupling_.matrix;
  h.matrix += Complex(-j_hop) * hopping_.matrix;
  h.matrix.prune(Complex(0.0));
  h.matrix.makeCompressed();
  return h;
}

RealCsr RealCsr::from_sparse(const Eigen::SparseMatrix<Complex>& m) {
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> rm = m;
  rm.makeCompressed();
  RealCsr out;
  out.n_rows = static_cast<int>(rm.rows());
  out.n_cols = static_cast<int>(rm.cols());
  out.row_ptr.assign(rm.outerIndexPtr(), rm.outerIndexPtr() + rm.rows() + 1);
  out.col_idx.assign(rm.innerIndexPtr(), rm.innerIndexPtr() + rm.nonZeros());
  out.values.reserve(static_cast<std::size_t>(rm.nonZeros()));
  for (Eigen::Index k = 0; k < rm.nonZeros(); ++k) {
    const Complex v = rm.valuePtr()[k];
    if (v.imag() != 0.0) throw std::invalid_argument("RealCsr: matrix has imaginary entries");
    out.values.push_back(v.real());
  }
  return out;
}

SparseOperator build_h0(const BasisPtr& basis, const Couplings& couplings) {
  const double omega_c = basis->config().omega_c;
  const double omega_z = omega_c - couplings.delta;
  HamiltonianTemplates t(basis);
  return t.assemble(omega_c, omega_z, couplings.g, 0.0);
}

SparseOperator build_hint(const BasisPtr& basis, double j_hop) {
  SparseOperator h = hopping_operator(basis);
  h.matrix *= Complex(-j_hop);
  h.matrix.prune(Complex(0.0));
  return h;
}

SparseOperator build_ht(const BasisPtr& basis, const Couplings& couplings) {
  return build_h0(basis, couplings) + build_hint(basis, couplings.j_hop);
}

JcLevels jc_analytic(int n, double g, double delta, double omega_c) {
  if (n < 1) throw std::invalid_argument("jc_analytic: n must be >= 1 (ground level is E=0)");
  const double chi = std::sqrt(delta * delta + 4.0 * n * g * g);
  if (chi == 0.0) throw std::invalid_argument("jc_analytic: mixing angle undefined at g = delta = 0");
  const double base = n * omega_c - 0.5 * delta;
  // Clamp guards round-off just outside [0, 1] near the decoupled limit.
  const double arg = std::clamp(0.5 * (1.0 - delta / chi), 0.0, 1.0);
  return {base + 0.5 * chi, base - 0.5 * chi, 2.0 * std::asin(std::sqrt(arg))};
}

}  // namespace jcqoc
