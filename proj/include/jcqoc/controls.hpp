#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace jcqoc {

/// Linear ramp between initial and target couplings over [0, T].
struct RampSpec {
  double g_start = 0.0;
  double g_end = 1.0;
  double j_start = 0.5;
  double j_end = 0.02;
  double total_time = 1.0;

  void validate() const;
};

struct ControlValues {
  double g;
  double j;
};

ControlValues ramp_eval(const RampSpec& spec, double t);

/// s(t) = 1 - cos(2 pi t / T); vanishes at both ends.
double envelope_s(double t, double total_time);

/// CRAB coefficients: c1/c2 modulate g, d1/d2 modulate J, dw1/dw2 are the
/// frequency offsets of the g and J harmonics.
struct CrabParams {
  static constexpr std::size_t kHarmonics = 8;
  static constexpr std::size_t kSize = 6 * kHarmonics;
  using Row = std::array<double, kHarmonics>;

  Row c1{}, c2{}, d1{}, d2{}, dw1{}, dw2{};

  /// Layout c1, c2, d1, d2, dw1, dw2.
  std::vector<double> flat() const;
  static CrabParams from_flat(std::span<const double> x);
  bool finite() const;
};

struct Constraints {
  double g_max = 1.0;
  double j_max = 1.0;

  void validate() const;
};

/// Harmonic argument omega_k t / T (literal) or 2 pi omega_k t / T.
enum class AngularConvention { literal, two_pi };

/// Sign-preserving clip to [-limit, limit].
double clip_coupling(double value, double limit);

/// g(t) = g0(t) [1 + s(t) f1(t)], J(t) = J0(t) [1 + s(t) f2(t)], each clipped.
ControlValues crab_eval(const RampSpec& spec, const CrabParams& params,
                        const Constraints& constraints, double t,
                        AngularConvention convention = AngularConvention::literal);

/// Time-dependent couplings g(t), J(t) on [0, T].
class ControlSchedule {
 public:
  virtual ~ControlSchedule() = default;
  virtual ControlValues at(double t) const = 0;
  virtual double total_time() const = 0;

  /// Values at t_k = k * step for k = 0 .. g.size()-1. Implementations may
  /// override this with a faster recurrence; results must agree with at()
  /// to round-off.
  virtual void sample_uniform(double step, std::span<double> g, std::span<double> j) const;

  /// True for schedules with jumps. Integrators then evaluate every stage of
  /// a step on the piece containing the step midpoint (see at_in_step).
  virtual bool piecewise() const { return false; }
  /// Value at t on the piece that contains t_ref.
  virtual ControlValues at_in_step(double t, double /*t_ref*/) const { return at(t); }
};

using SchedulePtr = std::shared_ptr<const ControlSchedule>;

class ConstantSchedule final : public ControlSchedule {
 public:
  ConstantSchedule(ControlValues values, double total_time);
  ControlValues at(double t) const override;
  double total_time() const override { return total_time_; }

 private:
  ControlValues values_;
  double total_time_;
};

class RampSchedule final : public ControlSchedule {
 public:
  explicit RampSchedule(RampSpec spec);
  ControlValues at(double t) const override;
  double total_time() const override { return spec_.total_time; }
  const RampSpec& spec() const { return spec_; }

 private:
  RampSpec spec_;
};

class CrabSchedule final : public ControlSchedule {
 public:
  CrabSchedule(RampSpec spec, CrabParams params, Constraints constraints,
               AngularConvention convention = AngularConvention::literal);
  ControlValues at(double t) const override;
  double total_time() const override { return spec_.total_time; }
  void sample_uniform(double step, std::span<double> g, std::span<double> j) const override;

  const RampSpec& spec() const { return spec_; }
  const CrabParams& params() const { return params_; }
  const Constraints& constraints() const { return constraints_; }
  AngularConvention convention() const { return convention_; }

 private:
  RampSpec spec_;
  CrabParams params_;
  Constraints constraints_;
  AngularConvention convention_;
};

struct NoiseSpec {
  double sigma = 0.0;
  int grid_points = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Base schedule plus independent Gaussian offsets on g and J, drawn on
/// `grid_points` equal sub-intervals of [0, T] and held constant on each.
/// The noisy value is not clipped.
class NoisySchedule final : public ControlSchedule {
 public:
  NoisySchedule(SchedulePtr base, const NoiseSpec& noise);
  ControlValues at(double t) const override;
  double total_time() const override { return base_->total_time(); }
  void sample_uniform(double step, std::span<double> g, std::span<double> j) const override;
  bool piecewise() const override { return true; }
  ControlValues at_in_step(double t, double t_ref) const override;

  const std::vector<double>& g_offsets() const { return dg_; }
  const std::vector<double>& j_offsets() const { return dj_; }

 private:
  std::size_t node(double t) const;

  SchedulePtr base_;
  std::vector<double> dg_;
  std::vector<double> dj_;
};

/// Returns `base` itself when sigma == 0.
SchedulePtr apply_noise(SchedulePtr base, const NoiseSpec& noise);

/// CSV with columns t,g,J at `samples` uniformly spaced times including both ends.
void write_waveform_csv(std::ostream& os, const ControlSchedule& schedule, std::size_t samples);

}  // namespace jcqoc
