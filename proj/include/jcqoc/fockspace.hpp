#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

namespace jcqoc {

using Complex = std::complex<double>;

struct LatticeConfig {
  int n_sites = 4;
  int n_excitations = 4;
  int fock_cutoff = 4;
  double omega_c = 0.0;
  double omega_z = 0.0;
  bool periodic = true;

  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// One basis configuration: photon numbers n_1..n_N followed by qubit bits
/// s_1..s_N, stored as a single tuple so that ordering is plain
/// lexicographic comparison.
struct Occupation {
  std::vector<std::uint8_t> photons;
  std::vector<std::uint8_t> qubits;

  int excitations() const;
  auto operator<=>(const Occupation&) const = default;
  bool operator==(const Occupation&) const = default;
};

/// All occupations of the lattice with a fixed total excitation number,
/// sorted lexicographically over (n_1..n_N, s_1..s_N).
class SectorBasis {
 public:
  SectorBasis(LatticeConfig config, int sector, std::vector<Occupation> states);

  const LatticeConfig& config() const { return config_; }
  int sector() const { return sector_; }
  int n_sites() const { return config_.n_sites; }
  std::size_t dim() const { return states_.size(); }
  const std::vector<Occupation>& states() const { return states_; }
  const Occupation& state(std::size_t i) const { return states_[i]; }

  /// Position of `occ`, or -1 if it is not part of this sector.
  long find(const Occupation& occ) const;
  /// Position of `occ`; throws std::out_of_range if absent.
  std::size_t index_of(const Occupation& occ) const;

  /// Same lattice and sector.
  bool same_as(const SectorBasis& other) const;

 private:
  LatticeConfig config_;
  int sector_;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

BasisPtr enumerate_sector(const LatticeConfig& config, int m);

/// Sparse complex matrix mapping amplitudes on `cols` to amplitudes on `rows`.
struct SparseOperator {
  BasisPtr rows;
  BasisPtr cols;
  Eigen::SparseMatrix<Complex> matrix;

  struct Entry {
    std::size_t row;
    std::size_t col;
    Complex value;
  };

  /// Duplicate (row, col) pairs are summed.
  static SparseOperator from_entries(BasisPtr rows, BasisPtr cols,
                                     const std::vector<Entry>& entries);

  SparseOperator adjoint() const;
  bool is_square() const { return rows->same_as(*cols); }
};

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator*(Complex s, const SparseOperator& a);
/// Composition a*b; requires a.cols == b.rows.
SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);

enum class LadderKind {
  annihilate_photon,
  create_photon,
  lower_qubit,
  raise_qubit,
  qubit_z,
  photon_number,
};

/// Change of the excitation number produced by `kind`.
int excitation_change(LadderKind kind);

/// Site-local operator between two sectors. `site` is 1-based.
SparseOperator ladder_op(const BasisPtr& from, const BasisPtr& to, int site,
                         LadderKind kind);

}  // namespace jcqoc
