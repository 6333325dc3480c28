#include "jcqoc/fockspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "jcqoc/errors.hpp"

namespace jcqoc {

void LatticeConfig::validate() const {
  if (n_sites < 1) throw ConfigError("lattice: n_sites must be >= 1");
  if (n_excitations < 0) throw ConfigError("lattice: n_excitations must be >= 0");
  if (fock_cutoff < 1) throw ConfigError("lattice: fock_cutoff must be >= 1");
  if (fock_cutoff < n_excitations)
    throw ConfigError("lattice: fock_cutoff must be >= n_excitations");
  if (!std::isfinite(omega_c) || !std::isfinite(omega_z))
    throw ConfigError("lattice: frequencies must be finite");
  if (!periodic) throw ConfigError("lattice: only periodic boundaries are supported");
}

int Occupation::excitations() const {
  return std::accumulate(photons.begin(), photons.end(), 0) +
         std::accumulate(qubits.begin(), qubits.end(), 0);
}

SectorBasis::SectorBasis(LatticeConfig config, int sector, std::vector<Occupation> states)
    : config_(config), sector_(sector), states_(std::move(states)) {
  std::sort(states_.begin(), states_.end());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const auto& s = states_[i];
    if (static_cast<int>(s.photons.size()) != config_.n_sites ||
        static_cast<int>(s.qubits.size()) != config_.n_sites)
      throw std::invalid_argument("SectorBasis: occupation has wrong site count");
    if (s.excitations() != sector_)
      throw std::invalid_argument("SectorBasis: occupation outside sector");
    if (!index_.emplace(s, i).second)
      throw std::invalid_argument("SectorBasis: duplicate occupation");
  }
}

long SectorBasis::find(const Occupation& occ) const {
  auto it = index_.find(occ);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::size_t SectorBasis::index_of(const Occupation& occ) const {
  auto it = index_.find(occ);
  if (it == index_.end()) throw std::out_of_range("occupation not in sector");
  return it->second;
}

bool SectorBasis::same_as(const SectorBasis& other) const {
  return this == &other ||
         (sector_ == other.sector_ && config_.n_sites == other.config_.n_sites &&
          config_.fock_cutoff == other.config_.fock_cutoff);
}

namespace {

void fill_photons(int site, int remaining, int cutoff, Occupation& cur,
                  std::vector<Occupation>& out) {
  const int n = static_cast<int>(cur.photons.size());
  if (site == n) {
    // Qubits take whatever is left, one excitation each at most.
    if (remaining > n) return;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != remaining) continue;
      for (int j = 0; j < n; ++j) cur.qubits[j] = static_cast<std::uint8_t>((mask >> j) & 1u);
      out.push_back(cur);
    }
    return;
  }
  for (int k = 0; k <= std::min(cutoff, remaining); ++k) {
    cur.photons[site] = static_cast<std::uint8_t>(k);
    fill_photons(site + 1, remaining - k, cutoff, cur, out);
  }
  cur.photons[site] = 0;
}

}  // namespace

BasisPtr enumerate_sector(const LatticeConfig& config, int m) {
  if (m < 0) throw ConfigError("enumerate_sector: excitation number must be >= 0");
  if (config.n_sites < 1) throw ConfigError("enumerate_sector: n_sites must be >= 1");
  if (config.n_sites > 16) throw ConfigError("enumerate_sector: n_sites > 16 not supported");
  if (config.fock_cutoff < 0 || config.fock_cutoff > 255)
    throw ConfigError("enumerate_sector: fock_cutoff out of range");
  if (m > config.n_sites * (config.fock_cutoff + 1))
    throw ConfigError("enumerate_sector: excitation number exceeds lattice capacity");

  Occupation cur;
  cur.photons.assign(config.n_sites, 0);
  cur.qubits.assign(config.n_sites, 0);
  std::vector<Occupation> states;
  fill_photons(0, m, config.fock_cutoff, cur, states);
  return std::make_shared<const SectorBasis>(config, m, std::move(states));
}

SparseOperator SparseOperator::from_entries(BasisPtr rows, BasisPtr cols,
                                            const std::vector<Entry>& entries) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row >= rows->dim() || e.col >= cols->dim())
      throw std::out_of_range("SparseOperator: entry index out of range");
    triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  }
  SparseOperator op{std::move(rows), std::move(cols), {}};
  op.matrix.resize(static_cast<Eigen::Index>(op.rows->dim()),
                   static_cast<Eigen::Index>(op.cols->dim()));
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

SparseOperator SparseOperator::adjoint() const {
  SparseOperator op{cols, rows, matrix.adjoint()};
  op.matrix.makeCompressed();
  return op;
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  if (!a.rows->same_as(*b.rows) || !a.cols->same_as(*b.cols))
    throw std::invalid_argument("SparseOperator: sector mismatch in sum");
  SparseOperator op{a.rows, a.cols, a.matrix + b.matrix};
  op.matrix.makeCompressed();
  return op;
}

SparseOperator operator*(Complex s, const SparseOperator& a) {
  SparseOperator op{a.rows, a.cols, s * a.matrix};
  return op;
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  if (!a.cols->same_as(*b.rows))
    throw std::invalid_argument("SparseOperator: sector mismatch in product");
  SparseOperator op{a.rows, b.cols, (a.matrix * b.matrix).pruned()};
  op.matrix.makeCompressed();
  return op;
}

int excitation_change(LadderKind kind) {
  switch (kind) {
    case LadderKind::annihilate_photon:
    case LadderKind::lower_qubit:
      return -1;
    case LadderKind::create_photon:
    case LadderKind::raise_qubit:
      return 1;
    case LadderKind::qubit_z:
    case LadderKind::photon_number:
      return 0;
  }
  return 0;
}

SparseOperator ladder_op(const BasisPtr& from, const BasisPtr& to, int site, LadderKind kind) {
  if (from->n_sites() != to->n_sites() ||
      from->config().fock_cutoff != to->config().fock_cutoff)
    throw std::invalid_argument("ladder_op: bases belong to different lattices");
  if (to->sector() - from->sector() != excitation_change(kind))
    throw std::invalid_argument("ladder_op: sector mismatch for operator kind");
  if (site < 1 || site > from->n_sites())
    throw std::out_of_range("ladder_op: site " + std::to_string(site) + " out of range");

  const std::size_t j = static_cast<std::size_t>(site - 1);
  const int cutoff = from->config().fock_cutoff;
  std::vector<SparseOperator::Entry> entries;
  for (std::size_t col = 0; col < from->dim(); ++col) {
    Occupation occ = from->state(col);
    const int n = occ.photons[j];
    const int s = occ.qubits[j];
    double coeff = 0.0;
    switch (kind) {
      case LadderKind::annihilate_photon:
        if (n == 0) continue;
        coeff = std::sqrt(static_cast<double>(n));
        occ.photons[j] = static_cast<std::uint8_t>(n - 1);
        break;
      case LadderKind::create_photon:
        if (n >= cutoff) continue;
        coeff = std::sqrt(static_cast<double>(n + 1));
        occ.photons[j] = static_cast<std::uint8_t>(n + 1);
        break;
      case LadderKind::lower_qubit:
        if (s == 0) continue;
        coeff = 1.0;
        occ.qubits[j] = 0;
        break;
      case LadderKind::raise_qubit:
        if (s == 1) continue;
        coeff = 1.0;
        occ.qubits[j] = 1;
        break;
      case LadderKind::qubit_z:
        coeff = s == 1 ? 1.0 : -1.0;
        break;
      case LadderKind::photon_number:
        if (n == 0) continue;
        coeff = static_cast<double>(n);
        break;
    }
    const long row = to->find(occ);
    if (row < 0) continue;
    entries.push_back({static_cast<std::size_t>(row), col, Complex(coeff, 0.0)});
  }
  return SparseOperator::from_entries(to, from, entries);
}

}  // namespace jcqoc
