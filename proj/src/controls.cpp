#include "jcqoc/controls.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "jcqoc/errors.hpp"

namespace jcqoc {

namespace {

// Accepts round-off overshoot of the integrator's last node.
double checked_time(double t, double total_time, const char* who) {
  const double slack = 1e-12 * std::max(1.0, total_time);
  if (!(t >= -slack && t <= total_time + slack))
    throw std::out_of_range(std::string(who) + ": time outside [0, T]");
  return std::clamp(t, 0.0, total_time);
}

double lerp_ramp(double start, double end, double tau) {
  // Written so that tau = 0 and tau = 1 reproduce the endpoints exactly.
  return start * (1.0 - tau) + end * tau;
}

}  // namespace

void RampSpec::validate() const {
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw ConfigError("ramp: total_time must be positive and finite");
  for (double v : {g_start, g_end, j_start, j_end})
    if (!std::isfinite(v)) throw ConfigError("ramp: couplings must be finite");
}

ControlValues ramp_eval(const RampSpec& spec, double t) {
  t = checked_time(t, spec.total_time, "ramp_eval");
  const double tau = t / spec.total_time;
  return {lerp_ramp(spec.g_start, spec.g_end, tau), lerp_ramp(spec.j_start, spec.j_end, tau)};
}

double envelope_s(double t, double total_time) {
  t = checked_time(t, total_time, "envelope_s");
  return 1.0 - std::cos(2.0 * std::numbers::pi * t / total_time);
}

std::vector<double> CrabParams::flat() const {
  std::vector<double> x;
  x.reserve(kSize);
  for (const Row* row : {&c1, &c2, &d1, &d2, &dw1, &dw2}) x.insert(x.end(), row->begin(), row->end());
  return x;
}

CrabParams CrabParams::from_flat(std::span<const double> x) {
  if (x.size() != kSize)
    throw std::invalid_argument("CrabParams: expected " + std::to_string(kSize) + " values");
  CrabParams p;
  std::size_t off = 0;
  for (Row* row : {&p.c1, &p.c2, &p.d1, &p.d2, &p.dw1, &p.dw2}) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(off), kHarmonics, row->begin());
    off += kHarmonics;
  }
  return p;
}

bool CrabParams::finite() const {
  const auto x = flat();
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

void Constraints::validate() const {
  if (!(g_max > 0.0) || !std::isfinite(g_max)) throw ConfigError("constraints: g_max must be > 0");
  if (!(j_max > 0.0) || !std::isfinite(j_max)) throw ConfigError("constraints: j_max must be > 0");
}

double clip_coupling(double value, double limit) {
  if (std::abs(value) > limit) return std::copysign(limit, value);
  return value;
}

namespace {

double fourier_series(const CrabParams::Row& cos_coef, const CrabParams::Row& sin_coef,
                      const CrabParams::Row& offsets, double phase_scale) {
  double f = 0.0;
  for (std::size_t k = 0; k < CrabParams::kHarmonics; ++k) {
    const double omega = static_cast<double>(k + 1) + offsets[k];
    const double arg = omega * phase_scale;
    f += cos_coef[k] * std::cos(arg) + sin_coef[k] * std::sin(arg);
  }
  return f;
}

double harmonic_scale(AngularConvention convention) {
  return convention == AngularConvention::two_pi ? 2.0 * std::numbers::pi : 1.0;
}

}  // namespace

ControlValues crab_eval(const RampSpec& spec, const CrabParams& params,
                        const Constraints& constraints, double t, AngularConvention convention) {
  t = checked_time(t, spec.total_time, "crab_eval");
  const ControlValues base = ramp_eval(spec, t);
  const double s = envelope_s(t, spec.total_time);
  const double phase = harmonic_scale(convention) * t / spec.total_time;
  const double f1 = fourier_series(params.c1, params.c2, params.dw1, phase);
  const double f2 = fourier_series(params.d1, params.d2, params.dw2, phase);
  return {clip_coupling(base.g * (1.0 + s * f1), constraints.g_max),
          clip_coupling(base.j * (1.0 + s * f2), constraints.j_max)};
}

void ControlSchedule::sample_uniform(double step, std::span<double> g, std::span<double> j) const {
  if (g.size() != j.size()) throw std::invalid_argument("sample_uniform: span size mismatch");
  for (std::size_t k = 0; k < g.size(); ++k) {
    const ControlValues v = at(static_cast<double>(k) * step);
    g[k] = v.g;
    j[k] = v.j;
  }
}

ConstantSchedule::ConstantSchedule(ControlValues values, double total_time)
    : values_(values), total_time_(total_time) {
  if (!(total_time > 0.0)) throw ConfigError("ConstantSchedule: total_time must be > 0");
}

ControlValues ConstantSchedule::at(double t) const {
  checked_time(t, total_time_, "ConstantSchedule");
  return values_;
}

RampSchedule::RampSchedule(RampSpec spec) : spec_(spec) { spec_.validate(); }

ControlValues RampSchedule::at(double t) const { return ramp_eval(spec_, t); }

CrabSchedule::CrabSchedule(RampSpec spec, CrabParams params, Constraints constraints,
                           AngularConvention convention)
    : spec_(spec), params_(params), constraints_(constraints), convention_(convention) {
  spec_.validate();
  constraints_.validate();
  if (std::abs(spec_.g_start) > constraints_.g_max || std::abs(spec_.g_end) > constraints_.g_max)
    throw ConfigError("CrabSchedule: boundary g values exceed g_max");
  if (std::abs(spec_.j_start) > constraints_.j_max || std::abs(spec_.j_end) > constraints_.j_max)
    throw ConfigError("CrabSchedule: boundary J values exceed j_max");
}

ControlValues CrabSchedule::at(double t) const {
  return crab_eval(spec_, params_, constraints_, t, convention_);
}

void CrabSchedule::sample_uniform(double step, std::span<double> g, std::span<double> j) const {
  if (g.size() != j.size()) throw std::invalid_argument("sample_uniform: span size mismatch");
  for (std::size_t k = 0; k < g.size(); ++k) {
    const ControlValues v = at(static_cast<double>(k) * step);
    g[k] = v.g;
    j[k] = v.j;
  }
}

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise: sigma must be >= 0");
  if (grid_points < 1) throw ConfigError("noise: grid_points must be >= 1");
}

NoisySchedule::NoisySchedule(SchedulePtr base, const NoiseSpec& noise) : base_(std::move(base)) {
  noise.validate();
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<std::size_t>(noise.grid_points);
  dg_.resize(n);
  dj_.resize(n);
  // Standard normals scaled by sigma: equal seeds give proportional
  // realizations across sigma values.
  for (auto& v : dg_) v = noise.sigma * normal(rng);
  for (auto& v : dj_) v = noise.sigma * normal(rng);
}

std::size_t NoisySchedule::node(double t) const {
  const double total = base_->total_time();
  const double tau = std::clamp(t / total, 0.0, 1.0);
  const auto k = static_cast<std::size_t>(tau * static_cast<double>(dg_.size()));
  return std::min(k, dg_.size() - 1);
}

ControlValues NoisySchedule::at(double t) const {
  const ControlValues v = base_->at(t);
  const std::size_t k = node(t);
  return {v.g + dg_[k], v.j + dj_[k]};
}

ControlValues NoisySchedule::at_in_step(double t, double t_ref) const {
  const ControlValues v = base_->at(t);
  const std::size_t k = node(t_ref);
  return {v.g + dg_[k], v.j + dj_[k]};
}

void NoisySchedule::sample_uniform(double step, std::span<double> g, std::span<double> j) const {
  base_->sample_uniform(step, g, j);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const std::size_t n = node(static_cast<double>(k) * step);
    g[k] += dg_[n];
    j[k] += dj_[n];
  }
}

SchedulePtr apply_noise(SchedulePtr base, const NoiseSpec& noise) {
  noise.validate();
  if (noise.sigma == 0.0) return base;
  return std::make_shared<const NoisySchedule>(std::move(base), noise);
}

void write_waveform_csv(std::ostream& os, const ControlSchedule& schedule, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("write_waveform_csv: need at least 2 samples");
  const double total = schedule.total_time();
  os << "t,g,J\n";
  os.precision(17);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = total * static_cast<double>(k) / static_cast<double>(samples - 1);
    const ControlValues v = schedule.at(t);
    os << t << ',' << v.g << ',' << v.j << '\n';
  }
}

}  // namespace jcqoc
