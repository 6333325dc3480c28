#include <algorithm>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "jcqoc/model.hpp"
#include "oracles.hpp"

using namespace jcqoc;

namespace {
LatticeConfig lattice(int n, int m, int cutoff, double omega_c = 0.0) {
  LatticeConfig c;
  c.n_sites = n;
  c.n_excitations = m;
  c.fock_cutoff = cutoff;
  c.omega_c = omega_c;
  return c;
}
Eigen::MatrixXcd dense(const SparseOperator& op) { return Eigen::MatrixXcd(op.matrix); }

Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd& h) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues();
}
}  // namespace

TEST_CASE("H_t matches the term-by-term dense oracle") {
  struct Case {
    int n, m, cutoff;
    double wc, delta, g, j;
  };
  for (const Case& c : {Case{4, 4, 4, 0.0, 0.0, 0.7, 0.3}, Case{4, 3, 4, 1.3, 0.4, -0.5, 1.1},
                        Case{3, 2, 2, 0.2, -0.3, 1.0, 0.02}, Case{2, 1, 1, 0.0, 0.0, 0.0, 0.5},
                        Case{1, 3, 3, 5.0, 0.5, 1.0, 0.25}}) {
    CAPTURE(c.n);
    CAPTURE(c.m);
    const auto basis = enumerate_sector(lattice(c.n, c.m, c.cutoff, c.wc), c.m);
    const Eigen::MatrixXcd lib = dense(build_ht(basis, {c.g, c.j, c.delta}));
    const Eigen::MatrixXcd ref =
        oracle::dense(oracle::tuples_of(*basis), oracle::hamiltonian(c.wc, c.wc - c.delta, c.g, c.j, c.cutoff));
    CHECK((lib - ref).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("H_t is Hermitian and conserves excitations") {
  const auto basis = enumerate_sector(lattice(4, 4, 4), 4);
  const SparseOperator h = build_ht(basis, {0.9, 0.4, 0.2});
  CHECK(h.is_square());
  CHECK((dense(h) - dense(h).adjoint()).cwiseAbs().maxCoeff() <= 1e-14);

  // The oracle on the full truncated space never couples different sectors.
  const auto all = oracle::all_tuples(3, 2);
  const auto op = oracle::hamiltonian(0.3, 0.1, 0.9, 0.4, 2);
  for (const auto& t : all)
    for (const auto& [coef, u] : op(t))
      if (coef != 0.0) CHECK(oracle::excitations(u) == oracle::excitations(t));
}

TEST_CASE("single JC cell matches the analytic doublet") {
  const double wc = 5.0, g = 1.0, delta = 0.3;
  for (int n = 1; n <= 4; ++n) {
    const auto basis = enumerate_sector(lattice(1, 4, 4, wc), n);
    const Eigen::VectorXd ev = eigenvalues(dense(build_h0(basis, {g, 0.0, delta})));
    const JcLevels lv = jc_analytic(n, g, delta, wc);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == doctest::Approx(lv.e_minus).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(lv.e_plus).epsilon(1e-12));
  }
}

TEST_CASE("jc_analytic examples") {
  const JcLevels a = jc_analytic(1, 1.0, 0.0, 5.0);
  CHECK(a.e_plus == doctest::Approx(6.0));
  CHECK(a.e_minus == doctest::Approx(4.0));
  CHECK(a.theta == doctest::Approx(std::numbers::pi / 2));

  const JcLevels b = jc_analytic(2, 1.0, 0.0, 0.0);
  CHECK(b.e_plus - b.e_minus == doctest::Approx(2.0 * std::sqrt(2.0)));

  CHECK(jc_analytic(1, 1e-9, 0.5, 0.0).theta < 1e-8);
  CHECK_THROWS(jc_analytic(0, 1.0, 0.0, 0.0));
  CHECK_THROWS(jc_analytic(1, 0.0, 0.0, 0.0));
}

TEST_CASE("lower polariton ladder is anharmonic") {
  const double wc = 2.0, g = 0.8;
  std::vector<double> e{0.0};
  for (int n = 1; n <= 4; ++n) e.push_back(jc_analytic(n, g, 0.0, wc).e_minus);
  for (int n = 1; n <= 3; ++n) CHECK(e[n + 1] - e[n] > e[n] - e[n - 1]);
}

TEST_CASE("common frequency shift moves sector energies rigidly") {
  const double shift = 0.75;
  const auto b0 = enumerate_sector(lattice(4, 4, 4, 0.0), 4);
  const auto b1 = enumerate_sector(lattice(4, 4, 4, shift), 4);
  const Eigen::MatrixXcd h0 = dense(build_ht(b0, {1.0, 0.3, 0.0}));
  const Eigen::MatrixXcd h1 = dense(build_ht(b1, {1.0, 0.3, 0.0}));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s0(h0), s1(h1);
  CHECK((s1.eigenvalues() - s0.eigenvalues() - Eigen::VectorXd::Constant(h0.rows(), 4 * shift)).cwiseAbs().maxCoeff() <
        1e-10);
  // ground state is non-degenerate here, so the vectors agree up to phase
  CHECK(std::abs(s0.eigenvectors().col(0).dot(s1.eigenvectors().col(0))) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("hopping term") {
  const auto b4 = enumerate_sector(lattice(4, 4, 4), 4);
  CHECK(build_hint(b4, 0.0).matrix.nonZeros() == 0);

  // Two sites with periodic wrap: both bonds join the same pair.
  const auto b = enumerate_sector(lattice(2, 1, 1), 1);
  const Eigen::MatrixXcd h = dense(build_hint(b, 0.3));
  const auto i = b->index_of({{1, 0}, {0, 0}}), k = b->index_of({{0, 1}, {0, 0}});
  CHECK(h(i, k).real() == doctest::Approx(-0.6));
  CHECK(h(k, i).real() == doctest::Approx(-0.6));
  CHECK(h(i, i).real() == 0.0);
}

TEST_CASE("boundary Hamiltonians") {
  const auto b = enumerate_sector(lattice(4, 4, 4), 4);
  const Eigen::MatrixXcd diag = dense(build_ht(b, {0.0, 0.0, 0.0}));
  CHECK((diag - Eigen::MatrixXcd(diag.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXcd h0 = dense(build_ht(b, {0.0, 0.5, 0.0}));
  const Eigen::MatrixXcd ht = dense(build_ht(b, {1.0, 0.02, 0.0}));
  const auto tup = oracle::tuples_of(*b);
  CHECK((h0 - oracle::dense(tup, oracle::hamiltonian(0, 0, 0.0, 0.5, 4))).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((ht - oracle::dense(tup, oracle::hamiltonian(0, 0, 1.0, 0.02, 4))).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("templates assemble the same operator as build_ht") {
  const auto b = enumerate_sector(lattice(4, 4, 4, 0.4), 4);
  const HamiltonianTemplates t(b);
  const Eigen::MatrixXcd a = dense(t.assemble(0.4, 0.1, 0.8, 1.7));
  const Eigen::MatrixXcd ref = dense(build_ht(b, {0.8, 1.7, 0.3}));
  CHECK((a - ref).cwiseAbs().maxCoeff() < 1e-14);

  // merged pattern: g * jc - J * hop reproduces the off-diagonal part
  const auto& m = t.merged();
  Eigen::MatrixXcd off = Eigen::MatrixXcd::Zero(a.rows(), a.cols());
  for (int r = 0; r < m.csr.n_rows; ++r)
    for (int k = m.csr.row_ptr[r]; k < m.csr.row_ptr[r + 1]; ++k)
      off(r, m.csr.col_idx[k]) += 0.8 * m.jc_values[k] - 1.7 * m.hop_values[k];
  off.diagonal() += (0.4 * t.photon_number() + 0.1 * t.qubit_number()).cast<Complex>();
  CHECK((off - ref).cwiseAbs().maxCoeff() < 1e-14);
}
