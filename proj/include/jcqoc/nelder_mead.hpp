#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace jcqoc {

struct NelderMeadOptions {
  std::size_t max_iterations = 150000;
  /// 0 means no cap beyond max_iterations.
  std::size_t max_evaluations = 0;
  /// Stop when f(worst) - f(best) over the simplex drops below this.
  double tolerance = 1e-8;
  /// Initial simplex: x0 plus one vertex displaced by this along each axis.
  double initial_step = 0.1;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  /// Stop as soon as the best value is at or below this.
  std::optional<double> target_value;

  void validate() const;
};

/// Coefficients recommended for high-dimensional problems
/// (expansion 1 + 2/n, contraction 0.75 - 1/(2n), shrink 1 - 1/n).
NelderMeadOptions adaptive_coefficients(NelderMeadOptions base, std::size_t dimension);

struct NelderMeadResult {
  std::vector<double> x_best;
  double f_best = 0.0;
  double f_initial = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  bool reached_target = false;
  /// Best value after each simplex update; non-increasing.
  std::vector<double> history;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex minimization. Deterministic for a deterministic objective.
/// Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& options = {});

}  // namespace jcqoc
