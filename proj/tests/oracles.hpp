#pragma once

// Independent reference implementations used only by the tests. They work on
// plain occupation tuples and dense matrices and share no code with the
// library beyond the Occupation type used to map indices.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "jcqoc/fockspace.hpp"

namespace oracle {

struct Tuple {
  std::vector<int> n;
  std::vector<int> s;
};

// Every (n_1..n_N, s_1..s_N) with n_j <= cutoff, optionally filtered by total
// excitation number (m < 0 keeps everything).
inline std::vector<Tuple> all_tuples(int n_sites, int cutoff, int m = -1) {
  std::vector<Tuple> out;
  const int per_site = 2 * (cutoff + 1);
  long total = 1;
  for (int j = 0; j < n_sites; ++j) total *= per_site;
  for (long code = 0; code < total; ++code) {
    Tuple t{std::vector<int>(n_sites), std::vector<int>(n_sites)};
    long c = code;
    int exc = 0;
    for (int j = 0; j < n_sites; ++j) {
      const int digit = static_cast<int>(c % per_site);
      c /= per_site;
      t.n[j] = digit / 2;
      t.s[j] = digit % 2;
      exc += t.n[j] + t.s[j];
    }
    if (m < 0 || exc == m) out.push_back(t);
  }
  return out;
}

inline std::size_t brute_force_dim(int n_sites, int cutoff, int m) {
  return all_tuples(n_sites, cutoff, m).size();
}

inline jcqoc::Occupation to_occ(const Tuple& t) {
  jcqoc::Occupation o;
  for (int v : t.n) o.photons.push_back(static_cast<std::uint8_t>(v));
  for (int v : t.s) o.qubits.push_back(static_cast<std::uint8_t>(v));
  return o;
}

inline int excitations(const Tuple& t) {
  int e = 0;
  for (std::size_t j = 0; j < t.n.size(); ++j) e += t.n[j] + t.s[j];
  return e;
}

// Action of an operator on one basis tuple: list of (coefficient, result).
using Action = std::function<std::vector<std::pair<double, Tuple>>(const Tuple&)>;

// Dense matrix of an operator on an arbitrary list of tuples (rows/cols in
// list order). Results that fall outside the list are dropped.
inline Eigen::MatrixXcd dense(const std::vector<Tuple>& states, const Action& op) {
  const auto d = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  auto index = [&](const Tuple& t) -> long {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].n == t.n && states[i].s == t.s) return static_cast<long>(i);
    return -1;
  };
  for (Eigen::Index c = 0; c < d; ++c)
    for (const auto& [coef, t] : op(states[c])) {
      const long r = index(t);
      if (r >= 0) m(r, c) += coef;
    }
  return m;
}

// Hamiltonian with omega_c, omega_z, g, J written out term by term.
inline Action hamiltonian(double omega_c, double omega_z, double g, double j_hop, int cutoff) {
  return [=](const Tuple& t) {
    std::vector<std::pair<double, Tuple>> out;
    const int n_sites = static_cast<int>(t.n.size());
    double diag = 0.0;
    for (int j = 0; j < n_sites; ++j) diag += omega_c * t.n[j] + omega_z * t.s[j];
    out.push_back({diag, t});
    for (int j = 0; j < n_sites; ++j) {
      // a^+ s-
      if (t.s[j] == 1 && t.n[j] < cutoff) {
        Tuple u = t;
        u.s[j] = 0;
        u.n[j] += 1;
        out.push_back({g * std::sqrt(double(t.n[j] + 1)), u});
      }
      // s+ a
      if (t.s[j] == 0 && t.n[j] > 0) {
        Tuple u = t;
        u.s[j] = 1;
        u.n[j] -= 1;
        out.push_back({g * std::sqrt(double(t.n[j])), u});
      }
    }
    // -J sum_j (a_j^+ a_{j+1} + a_{j+1}^+ a_j), periodic
    for (int j = 0; j < n_sites; ++j) {
      const int k = (j + 1) % n_sites;
      for (auto [to, from] : {std::pair{j, k}, std::pair{k, j}}) {
        if (t.n[from] == 0) continue;
        Tuple u = t;
        const double amp_a = std::sqrt(double(u.n[from]));
        u.n[from] -= 1;
        if (u.n[to] >= cutoff) continue;
        const double amp_c = std::sqrt(double(u.n[to] + 1));
        u.n[to] += 1;
        out.push_back({-j_hop * amp_a * amp_c, u});
      }
    }
    return out;
  };
}

inline Action annihilate(int site) {
  return [=](const Tuple& t) {
    std::vector<std::pair<double, Tuple>> out;
    if (t.n[site] > 0) {
      Tuple u = t;
      u.n[site] -= 1;
      out.push_back({std::sqrt(double(t.n[site])), u});
    }
    return out;
  };
}

inline Action lower(int site) {
  return [=](const Tuple& t) {
    std::vector<std::pair<double, Tuple>> out;
    if (t.s[site] == 1) {
      Tuple u = t;
      u.s[site] = 0;
      out.push_back({1.0, u});
    }
    return out;
  };
}

// Maps a library basis onto oracle tuples in library order.
inline std::vector<Tuple> tuples_of(const jcqoc::SectorBasis& b) {
  std::vector<Tuple> out;
  for (const auto& o : b.states()) {
    Tuple t;
    for (auto v : o.photons) t.n.push_back(v);
    for (auto v : o.qubits) t.s.push_back(v);
    out.push_back(t);
  }
  return out;
}

// Full dense Lindblad right-hand side with cavity decay kappa and qubit
// decay gamma: -i[H, rho] + sum_k L rho L^+ - (1/2){L^+ L, rho}.
struct DenseLindblad {
  Eigen::MatrixXcd h_fixed;  // frequency part
  Eigen::MatrixXcd c_op;     // JC coupling (times g)
  Eigen::MatrixXcd b_op;     // hopping (times -J)
  std::vector<Eigen::MatrixXcd> jumps;

  Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho, double g, double j) const {
    const Eigen::MatrixXcd h = h_fixed + g * c_op + j * b_op;
    const std::complex<double> i(0.0, 1.0);
    Eigen::MatrixXcd out = -i * (h * rho - rho * h);
    for (const auto& l : jumps) {
      const Eigen::MatrixXcd ll = l.adjoint() * l;
      out += l * rho * l.adjoint() - 0.5 * (ll * rho + rho * ll);
    }
    return out;
  }
};

inline DenseLindblad dense_lindblad(const std::vector<Tuple>& states, double omega_c, double omega_z,
                                    int cutoff, double kappa, double gamma) {
  DenseLindblad d;
  d.h_fixed = dense(states, hamiltonian(omega_c, omega_z, 0.0, 0.0, cutoff));
  d.c_op = dense(states, hamiltonian(0.0, 0.0, 1.0, 0.0, cutoff));
  d.b_op = dense(states, hamiltonian(0.0, 0.0, 0.0, 1.0, cutoff));
  const int n_sites = static_cast<int>(states.front().n.size());
  for (int j = 0; j < n_sites; ++j) {
    if (kappa > 0) d.jumps.push_back(std::sqrt(kappa) * dense(states, annihilate(j)));
    if (gamma > 0) d.jumps.push_back(std::sqrt(gamma) * dense(states, lower(j)));
  }
  return d;
}

}  // namespace oracle
