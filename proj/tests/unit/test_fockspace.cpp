#include "doctest.h"
#include "jcqoc/errors.hpp"
#include "jcqoc/fockspace.hpp"
#include "oracles.hpp"

using namespace jcqoc;

namespace {
LatticeConfig lattice(int n, int m, int cutoff) {
  LatticeConfig c;
  c.n_sites = n;
  c.n_excitations = m;
  c.fock_cutoff = cutoff;
  return c;
}

Eigen::MatrixXcd dense(const SparseOperator& op) { return Eigen::MatrixXcd(op.matrix); }
}  // namespace

TEST_CASE("sector dimensions match brute-force enumeration") {
  const std::size_t expected[] = {1, 8, 32, 88, 192};
  for (int m = 0; m <= 4; ++m) {
    const auto b = enumerate_sector(lattice(4, 4, 4), m);
    CHECK(b->dim() == oracle::brute_force_dim(4, 4, m));
    CHECK(b->dim() == expected[m]);
  }
  for (int n = 1; n <= 3; ++n)
    for (int cutoff = 1; cutoff <= 3; ++cutoff)
      for (int m = 0; m <= cutoff; ++m)
        CHECK(enumerate_sector(lattice(n, cutoff, cutoff), m)->dim() == oracle::brute_force_dim(n, cutoff, m));
}

TEST_CASE("single-cell bases") {
  const auto b0 = enumerate_sector(lattice(1, 1, 1), 0);
  REQUIRE(b0->dim() == 1);
  CHECK(b0->state(0).photons == std::vector<std::uint8_t>{0});
  CHECK(b0->state(0).qubits == std::vector<std::uint8_t>{0});

  const auto b1 = enumerate_sector(lattice(1, 1, 1), 1);
  REQUIRE(b1->dim() == 2);
  CHECK(b1->find(Occupation{{1}, {0}}) >= 0);
  CHECK(b1->find(Occupation{{0}, {1}}) >= 0);
}

TEST_CASE("every basis tuple carries m excitations and the order is strict") {
  for (int m = 0; m <= 4; ++m) {
    const auto b = enumerate_sector(lattice(4, 4, 4), m);
    for (std::size_t i = 0; i < b->dim(); ++i) {
      CHECK(b->state(i).excitations() == m);
      if (i > 0) CHECK(b->state(i - 1) < b->state(i));
      CHECK(b->index_of(b->state(i)) == i);
    }
  }
}

TEST_CASE("sector enumeration rejects bad input") {
  CHECK_THROWS_AS(enumerate_sector(lattice(4, 4, 4), -1), ConfigError);
  CHECK_THROWS_AS(enumerate_sector(lattice(2, 2, 2), 7), ConfigError);
  LatticeConfig bad = lattice(4, 4, 2);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("ladder operator matrix elements") {
  const auto c = lattice(1, 2, 2);
  const auto b0 = enumerate_sector(c, 0), b1 = enumerate_sector(c, 1), b2 = enumerate_sector(c, 2);

  const SparseOperator a1 = ladder_op(b1, b0, 1, LadderKind::annihilate_photon);
  CHECK(dense(a1)(0, b1->index_of({{1}, {0}})).real() == doctest::Approx(1.0));

  const SparseOperator a2 = ladder_op(b2, b1, 1, LadderKind::annihilate_photon);
  CHECK(dense(a2)(b1->index_of({{1}, {0}}), b2->index_of({{2}, {0}})).real() == doctest::Approx(std::sqrt(2.0)));

  const SparseOperator sm = ladder_op(b1, b0, 1, LadderKind::lower_qubit);
  const Eigen::MatrixXcd d = dense(sm);
  CHECK(d(0, b1->index_of({{0}, {1}})).real() == doctest::Approx(1.0));
  CHECK(std::abs(d(0, b1->index_of({{1}, {0}}))) == 0.0);

  CHECK_THROWS_AS(ladder_op(b1, b0, 2, LadderKind::annihilate_photon), std::out_of_range);
  CHECK_THROWS_AS(ladder_op(b1, b1, 1, LadderKind::annihilate_photon), std::invalid_argument);
}

TEST_CASE("creation is the adjoint of annihilation and a^+ a is the number operator") {
  const auto c = lattice(3, 3, 3);
  for (int m = 1; m <= 3; ++m) {
    const auto lo = enumerate_sector(c, m - 1), hi = enumerate_sector(c, m);
    for (int site = 1; site <= 3; ++site) {
      const SparseOperator a = ladder_op(hi, lo, site, LadderKind::annihilate_photon);
      const SparseOperator ad = ladder_op(lo, hi, site, LadderKind::create_photon);
      CHECK((dense(ad) - dense(a.adjoint())).cwiseAbs().maxCoeff() == 0.0);

      const SparseOperator sm = ladder_op(hi, lo, site, LadderKind::lower_qubit);
      const SparseOperator sp = ladder_op(lo, hi, site, LadderKind::raise_qubit);
      CHECK((dense(sp) - dense(sm.adjoint())).cwiseAbs().maxCoeff() == 0.0);

      const SparseOperator n = ladder_op(hi, hi, site, LadderKind::photon_number);
      CHECK((dense(n) - dense(ad * a)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("a^+ respects the Fock cutoff") {
  const auto c = lattice(2, 2, 2);
  const auto b1 = enumerate_sector(c, 1), b2 = enumerate_sector(c, 2);
  // matches the oracle on every element
  const auto rows = oracle::tuples_of(*b2), cols = oracle::tuples_of(*b1);
  const SparseOperator ad = ladder_op(b1, b2, 1, LadderKind::create_photon);
  const Eigen::MatrixXcd d = dense(ad);
  for (std::size_t cidx = 0; cidx < cols.size(); ++cidx) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double expect = 0.0;
      oracle::Tuple t = cols[cidx];
      if (t.n[0] < 2) {
        const double amp = std::sqrt(double(t.n[0] + 1));
        t.n[0] += 1;
        if (t.n == rows[r].n && t.s == rows[r].s) expect = amp;
      }
      CHECK(d(r, cidx).real() == doctest::Approx(expect));
    }
  }
}

TEST_CASE("excitation change per operator kind") {
  CHECK(excitation_change(LadderKind::annihilate_photon) == -1);
  CHECK(excitation_change(LadderKind::lower_qubit) == -1);
  CHECK(excitation_change(LadderKind::create_photon) == 1);
  CHECK(excitation_change(LadderKind::raise_qubit) == 1);
  CHECK(excitation_change(LadderKind::qubit_z) == 0);
  CHECK(excitation_change(LadderKind::photon_number) == 0);
}
