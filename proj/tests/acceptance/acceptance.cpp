// Acceptance run: one PASS/FAIL line per criterion; nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jcqoc/lindblad.hpp"
#include "jcqoc/model.hpp"
#include "jcqoc/optimizer.hpp"
#include "jcqoc/speedlimit.hpp"
#include "oracles.hpp"

using namespace jcqoc;

namespace {

const double kPi = std::numbers::pi;

// Optimizer budget shared by criteria 5, 6 and 8.
constexpr std::size_t kMaxEvaluations = 15000;
constexpr std::size_t kRestarts = 5;
constexpr std::uint64_t kSeed = 1;
// Extra evaluations spent polishing the threshold pulse before the noise study.
constexpr std::size_t kPolishEvaluations = 10000;
constexpr std::size_t kNoiseSamples = 200;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;
// ctest hides stdout of passing tests, so results are also kept on disk.
std::ofstream results_file;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::ostringstream line;
  line << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << detail;
  std::cout << line.str() << std::endl;
  if (results_file) results_file << line.str() << std::endl;
}

void note(const std::string& s) { std::cerr << "  .. " << s << std::endl; }

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

BasisPtr transfer_basis() {
  static const BasisPtr b = enumerate_sector(LatticeConfig{}, 4);
  return b;
}

ControlProblem transfer_problem(double g_max, double t_over_pi) {
  return ControlProblem::ground_state_transfer(transfer_basis(), {0.0, 0.5, 0.0}, {1.0, 0.02, 0.0}, {g_max, 2.0},
                                               t_over_pi * kPi);
}

PulseOptions pulse_options() {
  PulseOptions o;
  o.nelder_mead.max_evaluations = kMaxEvaluations;
  o.restarts = kRestarts;
  o.seed = kSeed;
  o.threshold_fidelity = 0.99;
  o.stop_after_success = true;
  return o;
}

const std::vector<double> kGMax{4.0, 2.0, 1.0};

// ---------------------------------------------------------------------------

void criterion1() {
  const std::vector<std::pair<double, double>> golden{{5.27, 0.6610}, {3.30, 0.42},  {3.28, 0.4223},
                                                      {2.23, 0.3995}, {1.96, 0.3276}, {1.90, 0.3001}};
  bool ok = true;
  std::string detail;
  for (const auto& [t, want] : golden) {
    const auto t0 = std::chrono::steady_clock::now();
    const double f = adiabatic_fidelity(transfer_problem(1.0, t));
    const double wall = seconds_since(t0);
    const bool pass = std::abs(f - want) <= 0.01 && wall < 10.0;
    ok = ok && pass;
    detail += fmt(t, 2) + "pi:" + fmt(f) + "(" + fmt(want) + "," + fmt(wall, 1) + "s) ";
  }
  report(1, "adiabatic golden values", ok, detail + "tol 0.01, <10 s");
}

void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const ControlProblem p = transfer_problem(1.0, 1.0);
  const double angle = bures_angle(p.psi0, p.psi_target);
  const double wall = seconds_since(t0);
  report(2, "state distance", std::abs(angle - 0.469 * kPi) <= 0.002 * kPi && wall < 1.0,
         "angle/pi = " + fmt(angle / kPi) + " (0.469 +- 0.002), " + fmt(wall, 3) + " s");
}

void criterion3() {
  const HamiltonianModel model(transfer_basis(), 0.0);
  const double f_sf = fidelity(ground_state(model.at({0.0, 0.5})).psi, analytic_sf_state(transfer_basis()));
  const double f_mi = fidelity(ground_state(model.at({1.0, 0.0})).psi, analytic_mi_state(transfer_basis(), 1.0, 0.0));
  report(3, "analytic limits", f_sf > 1.0 - 1e-10 && f_mi > 1.0 - 1e-10,
         "1-F(SF) = " + sci(1.0 - f_sf) + ", 1-F(MI) = " + sci(1.0 - f_mi));
}

void criterion4() {
  const std::vector<std::size_t> want{1, 8, 32, 88, 192};
  bool ok = true;
  std::string detail;
  for (int m = 0; m <= 4; ++m) {
    const std::size_t lib = enumerate_sector(LatticeConfig{}, m)->dim();
    const std::size_t brute = oracle::brute_force_dim(4, 4, m);
    ok = ok && lib == brute && lib == want[static_cast<std::size_t>(m)];
    detail += std::to_string(lib) + (m < 4 ? "," : "");
  }
  report(4, "sector dimensions", ok, detail + " vs brute force");
}

// Pulses at T = 3.30 pi keyed by g_max, reused by criterion 7.
std::map<double, CrabParams> table_s1_pulses;

void criterion5() {
  bool ok = true;
  std::string detail;
  for (double g : kGMax) {
    const auto t0 = std::chrono::steady_clock::now();
    const OptimizationReport r = optimize_pulse(transfer_problem(g, 3.30), pulse_options());
    const double wall = seconds_since(t0);
    table_s1_pulses[g] = r.best_params;
    const bool pass = (g == 1.0 ? r.best_fidelity < 0.99 && r.best_fidelity > 0.80 : r.best_fidelity >= 0.99) &&
                      wall <= 7200.0;
    ok = ok && pass;
    note("g_max=" + fmt(g, 0) + " F=" + fmt(r.best_fidelity, 5) + " restarts=" + std::to_string(r.restarts_run) +
         " " + fmt(wall, 0) + "s");
    detail += "g_max=" + fmt(g, 0) + ":F=" + fmt(r.best_fidelity) + "(" + std::to_string(r.restarts_run) +
              " restarts," + fmt(wall, 0) + "s) ";
  }
  report(5, "QOC success at 3.30pi", ok, detail + "want >=0.99, >=0.99, (0.80,0.99)");
}

struct ThresholdCase {
  double g_max;
  double reference_t;
  std::vector<double> grid;  // units of pi
};

// Grids open at the lower edge of the tolerance band, so a success at the
// first point cannot place T_th inside the band.
const std::vector<ThresholdCase> kThresholdCases{
    {4.0, 1.96, {1.46, 1.71, 1.96, 2.21, 2.46}},
    {2.0, 3.28, {2.78, 3.03, 3.28, 3.53, 3.78}},
    {1.0, 5.27, {4.77, 5.02, 5.27, 5.52, 5.77}},
};

// Threshold results keyed by g_max, reused by criterion 8.
std::map<double, ThresholdResult> thresholds;

void criterion6() {
  bool ok = true;
  std::string detail;
  for (const ThresholdCase& c : kThresholdCases) {
    std::vector<double> grid;
    for (double t : c.grid) grid.push_back(t * kPi);
    const auto t0 = std::chrono::steady_clock::now();
    PulseOptions o = pulse_options();
    o.stop_at_threshold = true;
    ThresholdResult r = threshold_time(transfer_problem(c.g_max, c.grid.front()), grid, o);
    const double t_th = r.t_threshold / kPi;
    const bool bracketed = r.found && r.scan_points.size() > 1;
    const bool pass = bracketed && std::abs(t_th - c.reference_t) <= 0.5;
    ok = ok && pass;
    note("g_max=" + fmt(c.g_max, 0) + " T_th=" + (r.found ? fmt(t_th, 2) + "pi" : "none") + " " +
         fmt(seconds_since(t0), 0) + "s");
    detail += "g_max=" + fmt(c.g_max, 0) + ":" + (r.found ? fmt(t_th, 2) + "pi" : "not found") +
              (r.found && !bracketed ? " at grid start" : "") + "(" + fmt(c.reference_t, 2) + ") ";
    thresholds[c.g_max] = std::move(r);
  }
  const auto t = [&](double g) { return thresholds[g].found ? thresholds[g].t_threshold : INFINITY; };
  const bool ordered = t(4.0) < t(2.0) && t(2.0) < t(1.0);
  report(6, "threshold ordering", ok && ordered, detail + (ordered ? "ordered" : "NOT ordered") + ", tol 0.5pi");
}

void criterion7() {
  bool ok = true;
  std::string detail;
  const DecoherenceRates rates = reference_rates();
  const auto sum = build_sector_sum_basis(LatticeConfig{});
  for (double g : kGMax) {
    if (!table_s1_pulses.count(g)) {
      ok = false;
      continue;
    }
    const ControlProblem p = transfer_problem(g, 3.30);
    const SchedulePtr s = p.schedule(table_s1_pulses[g]);
    const DensityMatrix rho0 = DensityMatrix::pure(sum, p.psi0);
    const double closed = schedule_fidelity(p, *s);
    const LindbladResult open = evolve_lindblad(rho0, *s, rates, p.total_time(), p.report_dt(), p.psi_target);
    const LindbladResult zero = evolve_lindblad(rho0, *s, {}, p.total_time(), p.report_dt(), p.psi_target);
    const double drop = closed - open.fidelity;
    const double dev = std::abs(zero.fidelity - closed);
    ok = ok && drop >= 0.0005 && drop <= 0.005 && dev < 1e-6;
    detail += "g_max=" + fmt(g, 0) + ":drop=" + fmt(drop, 5) + ",|zero-closed|=" + sci(dev) + " ";
  }
  report(7, "Lindblad", ok, detail + "want drop in [0.0005,0.005], dev < 1e-6");
}

void criterion8() {
  const std::map<double, double> reference{{1.0, 0.9902}, {2.0, 0.9910}, {4.0, 0.9948}};
  const std::vector<double> sigmas{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
  bool ok = true;
  std::string detail;
  for (double g : kGMax) {
    const ThresholdResult& th = thresholds[g];
    if (!th.found || !th.at_threshold) {
      ok = false;
      detail += "g_max=" + fmt(g, 0) + ":no T_th ";
      continue;
    }
    const ControlProblem p = transfer_problem(g, th.t_threshold / kPi);
    PulseOptions o = pulse_options();
    o.nelder_mead.max_evaluations = kPolishEvaluations;
    const OptimizationReport polished = optimize_from(p, th.at_threshold->report.best_params, o);
    const CrabParams& params = polished.best_fidelity >= th.at_threshold->best_fidelity
                                   ? polished.best_params
                                   : th.at_threshold->report.best_params;
    const auto pts = noise_robustness(p, params, sigmas, kNoiseSamples, kSeed);
    const NoisePoint& last = pts.back();
    bool monotone = true;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const double se = std::hypot(pts[k].std_fidelity, pts[k - 1].std_fidelity) / std::sqrt(double(kNoiseSamples));
      monotone = monotone && pts[k].mean_fidelity <= pts[k - 1].mean_fidelity + 2.0 * se;
    }
    const bool pass = last.mean_fidelity >= 0.985 && std::abs(last.mean_fidelity - reference.at(g)) <= 0.005 && monotone;
    ok = ok && pass;
    note("g_max=" + fmt(g, 0) + " F0=" + fmt(pts.front().mean_fidelity, 5) + " F(0.05)=" + fmt(last.mean_fidelity, 5));
    detail += "g_max=" + fmt(g, 0) + ":F(0)=" + fmt(pts.front().mean_fidelity) + ",F(0.05)=" +
              fmt(last.mean_fidelity) + "(" + fmt(reference.at(g)) + ")" + (monotone ? "" : ",non-monotone") + " ";
  }
  report(8, "noise robustness", ok, detail + "tol 0.005, floor 0.985");
}

void criterion9() {
  std::vector<std::string> failed;
  auto check = [&](const std::string& name, bool ok) {
    if (!ok) failed.push_back(name);
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  // Hermiticity of H at random couplings
  {
    const HamiltonianModel model(transfer_basis(), 0.3);
    double err = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Eigen::SparseMatrix<Complex> h = model.at({2.0 * u(rng), 2.0 * u(rng)}).matrix;
      const Eigen::SparseMatrix<Complex> d = h - Eigen::SparseMatrix<Complex>(h.adjoint());
      for (int c = 0; c < d.outerSize(); ++c)
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(d, c); it; ++it) err = std::max(err, std::abs(it.value()));
    }
    check("hermiticity", err == 0.0);
  }

  // Excitation conservation: closed evolution in the direct sum keeps <N> fixed
  {
    LatticeConfig small;
    small.n_sites = 3;
    small.n_excitations = 3;
    small.fock_cutoff = 3;
    const auto sum = build_sector_sum_basis(small);
    const auto p = ControlProblem::ground_state_transfer(sum->sector(3), {0.0, 0.5, 0.0}, {1.0, 0.02, 0.0},
                                                         {2.0, 2.0}, 2.0);
    LindbladOptions lo;
    lo.sample_every = 50;
    const LindbladResult r = evolve_lindblad(DensityMatrix::pure(sum, p.psi0), *p.schedule(random_params(3)), {},
                                             p.total_time(), p.report_dt(), p.psi_target, 0.0, lo);
    double dev = 0.0;
    for (double n : r.excitation_vs_t) dev = std::max(dev, std::abs(n - 3.0));
    check("excitation conservation", dev < 1e-10);

    const LindbladResult d = evolve_lindblad(DensityMatrix::pure(sum, p.psi0), *p.schedule(random_params(3)),
                                             reference_rates(), p.total_time(), p.report_dt(), p.psi_target, 0.0, lo);
    check("trace drift", d.max_trace_drift < 1e-8 && d.max_hermiticity_error < 1e-10 && d.min_eigenvalue > -1e-8);
  }

  // Norm drift and step halving for a random pulse at 3.30 pi
  {
    const ControlProblem p = transfer_problem(2.0, 3.30);
    const SchedulePtr s = p.schedule(random_params(11, {0.5, 0.3}));
    const Trajectory a = evolve(*p.model, p.psi0, *s, p.total_time(), p.report_dt());
    const Trajectory b = evolve(*p.model, p.psi0, *s, p.total_time(), 0.5 * p.report_dt());
    check("norm drift", a.norm_drift < 1e-8 && b.norm_drift < 1e-8);
    check("step halving", std::abs(fidelity(*a.final_state, p.psi_target) - fidelity(*b.final_state, p.psi_target)) <
                              1e-8);
  }

  // Clipping on 1e4 probes with oversized coefficients
  {
    const Constraints lim{1.0, 2.0};
    const RampSpec ramp{0.0, 1.0, 0.5, 0.02, 3.3 * kPi};
    bool ok = true;
    std::uniform_real_distribution<double> ut(0.0, ramp.total_time);
    for (int k = 0; k < 10000; ++k) {
      const CrabParams c = random_params(1000 + k / 100, {20.0, 0.5});
      const ControlValues v = crab_eval(ramp, c, lim, ut(rng), k % 2 ? AngularConvention::two_pi
                                                                      : AngularConvention::literal);
      ok = ok && std::abs(v.g) <= lim.g_max && std::abs(v.j) <= lim.j_max;
    }
    check("clipping", ok);
  }

  // Boundary pinning on 100 draws
  {
    const RampSpec ramp{0.0, 1.0, 0.5, 0.02, 3.3 * kPi};
    bool ok = true;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const CrabParams c = random_params(s);
      for (auto conv : {AngularConvention::literal, AngularConvention::two_pi}) {
        const ControlValues a = crab_eval(ramp, c, {2.0, 2.0}, 0.0, conv);
        const ControlValues b = crab_eval(ramp, c, {2.0, 2.0}, ramp.total_time, conv);
        ok = ok && a.g == 0.0 && a.j == 0.5 && b.g == 1.0 && b.j == 0.02;
      }
    }
    check("boundary pinning", ok);
  }

  // Nelder-Mead on a quadratic and on Rosenbrock
  {
    NelderMeadOptions o;
    o.tolerance = 1e-14;
    o.max_iterations = 20000;
    const Objective quad = [](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * (x[i] - 1.0) * (x[i] - 1.0);
      return s;
    };
    const NelderMeadResult q = nelder_mead(quad, std::vector<double>(4, 0.0), o);
    const Objective rosen = [](std::span<const double> x) {
      return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    const NelderMeadResult r = nelder_mead(rosen, {-1.2, 1.0}, o);
    check("nelder-mead", q.f_best < 1e-8 && std::abs(r.x_best[0] - 1.0) < 1e-4 && std::abs(r.x_best[1] - 1.0) < 1e-4);
  }

  std::string detail = "hermiticity, excitation conservation, norm/trace drift, clipping 1e4, pinning 100, "
                       "nelder-mead, step halving";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " " + f;
  }
  report(9, "property suites", failed.empty(), detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) results_file.open(argv[1]);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<int, std::function<void()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "exception", false, e.what());
    }
  }
  std::cout << failures << " criteria failed, " << fmt(seconds_since(t0), 0) << " s total" << std::endl;
  if (results_file) results_file << failures << " criteria failed, " << fmt(seconds_since(t0), 0) << " s total\n";
  return failures == 0 ? 0 : 1;
}
