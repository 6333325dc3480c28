#include "jcqoc/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "jcqoc/errors.hpp"

namespace jcqoc {

HamiltonianModel::HamiltonianModel(std::shared_ptr<const HamiltonianTemplates> templates,
                                   double delta)
    : templates_(std::move(templates)),
      omega_c_(templates_->basis()->config().omega_c),
      omega_z_(omega_c_ - delta) {
  diagonal_ = omega_c_ * templates_->photon_number() + omega_z_ * templates_->qubit_number();
}

HamiltonianModel::HamiltonianModel(const BasisPtr& basis, double delta)
    : HamiltonianModel(std::make_shared<const HamiltonianTemplates>(basis), delta) {}

SparseOperator HamiltonianModel::at(const ControlValues& v) const {
  return templates_->assemble(omega_c_, omega_z_, v.g, v.j);
}

namespace {

// Applies y = -i H x for H = diag + g * C - J * B. C and B never share a
// matrix position, so each keeps its own fixed CSR and g, J enter as scalars.
class Rhs {
 public:
  explicit Rhs(const HamiltonianModel& model) : diag_(model.diagonal()) {
    const auto& p = model.templates().merged();
    for (auto* part : {&jc_, &hop_}) part->row_ptr.assign(1, 0);
    for (int r = 0; r < p.csr.n_rows; ++r) {
      for (int k = p.csr.row_ptr[r]; k < p.csr.row_ptr[r + 1]; ++k) {
        if (p.jc_values[k] != 0.0) jc_.push(p.csr.col_idx[k], p.jc_values[k]);
        if (p.hop_values[k] != 0.0) hop_.push(p.csr.col_idx[k], p.hop_values[k]);
      }
      jc_.row_ptr.push_back(static_cast<int>(jc_.cols.size()));
      hop_.row_ptr.push_back(static_cast<int>(hop_.cols.size()));
    }
  }

  void set_couplings(double g, double j) {
    g_ = g;
    j_ = j;
  }

  void apply_h(const Complex* x, Complex* y) const {
    const int n = static_cast<int>(diag_.size());
    for (int r = 0; r < n; ++r) {
      double cre = 0.0, cim = 0.0, bre = 0.0, bim = 0.0;
      for (int k = jc_.row_ptr[r]; k < jc_.row_ptr[r + 1]; ++k) {
        cre += jc_.vals[k] * x[jc_.cols[k]].real();
        cim += jc_.vals[k] * x[jc_.cols[k]].imag();
      }
      for (int k = hop_.row_ptr[r]; k < hop_.row_ptr[r + 1]; ++k) {
        bre += hop_.vals[k] * x[hop_.cols[k]].real();
        bim += hop_.vals[k] * x[hop_.cols[k]].imag();
      }
      y[r] = Complex(diag_[r] * x[r].real() + g_ * cre - j_ * bre, diag_[r] * x[r].imag() + g_ * cim - j_ * bim);
    }
  }

  void apply(const Complex* x, Complex* y) const {
    apply_h(x, y);
    const int n = static_cast<int>(diag_.size());
    for (int r = 0; r < n; ++r) y[r] = Complex(y[r].imag(), -y[r].real());
  }

 private:
  struct Part {
    std::vector<int> row_ptr, cols;
    std::vector<double> vals;
    void push(int c, double v) {
      cols.push_back(c);
      vals.push_back(v);
    }
  };
  const Eigen::VectorXd& diag_;
  Part jc_, hop_;
  double g_ = 0.0, j_ = 0.0;
};

struct Integrator {
  Integrator(const HamiltonianModel& model, const ControlSchedule& schedule, double total_time,
             double dt)
      : rhs(model), steps(step_count(total_time, dt)), h(total_time / static_cast<double>(steps)) {
    if (std::abs(schedule.total_time() - total_time) > 1e-12 * std::max(1.0, total_time))
      throw std::invalid_argument("evolve: schedule duration differs from total_time");
    if (schedule.piecewise()) {
      // Three private nodes per step, all on the piece holding the midpoint,
      // so a jump on a step boundary never mixes two Hamiltonians in one step.
      stride = 3;
      g_nodes.resize(3 * steps);
      j_nodes.resize(3 * steps);
      for (std::size_t n = 0; n < steps; ++n) {
        const double mid = (static_cast<double>(n) + 0.5) * h;
        const double ts[3] = {static_cast<double>(n) * h, mid, std::min(total_time, (static_cast<double>(n) + 1.0) * h)};
        for (int s = 0; s < 3; ++s) {
          const ControlValues v = schedule.at_in_step(ts[s], mid);
          g_nodes[3 * n + s] = v.g;
          j_nodes[3 * n + s] = v.j;
        }
      }
    } else {
      const std::size_t nodes = 2 * steps + 1;
      g_nodes.resize(nodes);
      j_nodes.resize(nodes);
      schedule.sample_uniform(0.5 * h, g_nodes, j_nodes);
    }
    const auto dim = model.diagonal().size();
    k1.resize(dim);
    k2.resize(dim);
    k3.resize(dim);
    k4.resize(dim);
    tmp.resize(dim);
  }

  // Advances psi from t_n to t_{n+1}.
  // Node index of the step start, or of t = T for n == steps.
  std::size_t start_node(std::size_t n) const {
    if (stride == 2) return 2 * n;
    return n < steps ? 3 * n : 3 * steps - 1;
  }

  void step(std::size_t n, Eigen::VectorXcd& psi) {
    const std::size_t node = stride * n;
    rhs.set_couplings(g_nodes[node], j_nodes[node]);
    rhs.apply(psi.data(), k1.data());

    rhs.set_couplings(g_nodes[node + 1], j_nodes[node + 1]);
    tmp = psi + (0.5 * h) * k1;
    rhs.apply(tmp.data(), k2.data());
    tmp = psi + (0.5 * h) * k2;
    rhs.apply(tmp.data(), k3.data());

    rhs.set_couplings(g_nodes[node + 2], j_nodes[node + 2]);
    tmp = psi + h * k3;
    rhs.apply(tmp.data(), k4.data());

    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  double energy_spread(const Eigen::VectorXcd& psi, std::size_t node) {
    rhs.set_couplings(g_nodes[node], j_nodes[node]);
    rhs.apply_h(psi.data(), tmp.data());
    const double norm2 = psi.squaredNorm();
    const double mean = psi.dot(tmp).real() / norm2;
    // ||(H - <H>) psi|| avoids the cancellation in <H^2> - <H>^2 near eigenstates
    return (tmp - mean * psi).norm() / std::sqrt(norm2);
  }

  Rhs rhs;
  std::size_t steps;
  std::size_t stride = 2;
  double h;
  std::vector<double> g_nodes, j_nodes;
  Eigen::VectorXcd k1, k2, k3, k4, tmp;
};

void check_norm(const Eigen::VectorXcd& psi, double tolerance, double dt, double* drift_out) {
  const double drift = std::abs(psi.norm() - 1.0);
  if (drift_out) *drift_out = drift;
  if (!(drift <= tolerance))
    throw AccuracyError("evolve: norm drift " + std::to_string(drift) + " exceeds tolerance at dt=" +
                        std::to_string(dt) + "; reduce the time step");
}

void check_inputs(const HamiltonianModel& model, const StateVector& psi0, double total_time) {
  if (!psi0.basis()->same_as(*model.basis()))
    throw std::invalid_argument("evolve: initial state and Hamiltonian use different sectors");
  if (!(total_time > 0.0)) throw std::invalid_argument("evolve: total_time must be > 0");
}

}  // namespace

std::size_t step_count(double total_time, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("evolve: dt must be > 0");
  if (!(total_time > 0.0)) throw std::invalid_argument("evolve: total_time must be > 0");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total_time / dt - 1e-9)));
}

StateVector evolve_final(const HamiltonianModel& model, const StateVector& psi0,
                         const ControlSchedule& schedule, double total_time, double dt,
                         double norm_tolerance) {
  check_inputs(model, psi0, total_time);
  Integrator integ(model, schedule, total_time, dt);
  Eigen::VectorXcd psi = psi0.amplitudes();
  for (std::size_t n = 0; n < integ.steps; ++n) integ.step(n, psi);
  check_norm(psi, norm_tolerance, integ.h, nullptr);
  return StateVector(psi0.basis(), std::move(psi));
}

Trajectory evolve(const HamiltonianModel& model, const StateVector& psi0,
                  const ControlSchedule& schedule, double total_time, double dt,
                  const EvolveOptions& options) {
  check_inputs(model, psi0, total_time);
  if (options.sample_every == 0) throw std::invalid_argument("evolve: sample_every must be >= 1");
  Integrator integ(model, schedule, total_time, dt);
  Trajectory traj;
  traj.total_time = total_time;
  traj.dt = integ.h;
  traj.steps = integ.steps;

  Eigen::VectorXcd psi = psi0.amplitudes();
  auto record = [&](std::size_t n) {
    const std::size_t node = integ.start_node(n);
    traj.times.push_back(n == integ.steps ? total_time : static_cast<double>(n) * integ.h);
    traj.g_vs_t.push_back(integ.g_nodes[node]);
    traj.j_vs_t.push_back(integ.j_nodes[node]);
    if (options.track_energy) traj.delta_e_vs_t.push_back(integ.energy_spread(psi, node));
    if (options.target) {
      const Complex overlap = options.target->amplitudes().dot(psi);
      traj.fidelity_vs_t.push_back(std::norm(overlap) / psi.squaredNorm());
    }
    if (options.record_states) traj.states.emplace_back(psi0.basis(), psi);
    traj.norm_drift = std::max(traj.norm_drift, std::abs(psi.norm() - 1.0));
  };

  record(0);
  for (std::size_t n = 0; n < integ.steps; ++n) {
    integ.step(n, psi);
    if ((n + 1) % options.sample_every == 0 || n + 1 == integ.steps) record(n + 1);
  }
  check_norm(psi, options.norm_tolerance, integ.h, nullptr);
  if (options.track_energy && traj.times.size() >= 2)
    traj.delta_e_ave = trapezoid_average(traj.times, traj.delta_e_vs_t);
  traj.final_state.emplace(psi0.basis(), std::move(psi));
  return traj;
}

double energy_fluctuation(const StateVector& psi, const SparseOperator& h) {
  if (!h.is_square() || !h.rows->same_as(*psi.basis()))
    throw std::invalid_argument("energy_fluctuation: operator and state sectors differ");
  const Eigen::VectorXcd h_psi = h.matrix * psi.amplitudes();
  const double mean = psi.amplitudes().dot(h_psi).real();
  return (h_psi - mean * psi.amplitudes()).norm();
}

double trapezoid_average(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("trapezoid_average: need >= 2 matching samples");
  double integral = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k)
    integral += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
  const double span = times.back() - times.front();
  if (!(span > 0.0)) throw std::invalid_argument("trapezoid_average: empty time span");
  return integral / span;
}

double average_energy_fluctuation(const Trajectory& traj) {
  return trapezoid_average(traj.times, traj.delta_e_vs_t);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,g,J,fidelity,delta_e\n";
  os.precision(17);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k] << ',' << traj.g_vs_t[k] << ',' << traj.j_vs_t[k] << ',';
    if (k < traj.fidelity_vs_t.size()) os << traj.fidelity_vs_t[k];
    os << ',';
    if (k < traj.delta_e_vs_t.size()) os << traj.delta_e_vs_t[k];
    os << '\n';
  }
}

}  // namespace jcqoc
