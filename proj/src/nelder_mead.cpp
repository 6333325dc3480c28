#include "jcqoc/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "jcqoc/errors.hpp"

namespace jcqoc {

void NelderMeadOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("nelder_mead: max_iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw ConfigError("nelder_mead: tolerance must be >= 0");
  if (!(initial_step != 0.0) || !std::isfinite(initial_step))
    throw ConfigError("nelder_mead: initial_step must be non-zero");
  if (!(reflection > 0.0)) throw ConfigError("nelder_mead: reflection must be > 0");
  if (!(expansion > 1.0) || !(expansion > reflection))
    throw ConfigError("nelder_mead: expansion must exceed 1 and the reflection coefficient");
  if (!(contraction > 0.0 && contraction < 1.0))
    throw ConfigError("nelder_mead: contraction must be in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("nelder_mead: shrink must be in (0, 1)");
}

NelderMeadOptions adaptive_coefficients(NelderMeadOptions base, std::size_t dimension) {
  const double n = static_cast<double>(std::max<std::size_t>(dimension, 2));
  base.reflection = 1.0;
  base.expansion = 1.0 + 2.0 / n;
  base.contraction = 0.75 - 0.5 / n;
  base.shrink = 1.0 - 1.0 / n;
  return base;
}

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

class Simplex {
 public:
  Simplex(const Objective& f, const NelderMeadOptions& opt, NelderMeadResult& result)
      : f_(f), opt_(opt), result_(result) {}

  double eval(const std::vector<double>& x) {
    ++result_.evaluations;
    const double v = f_(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  bool budget_left() const {
    return opt_.max_evaluations == 0 || result_.evaluations < opt_.max_evaluations;
  }

 private:
  const Objective& f_;
  const NelderMeadOptions& opt_;
  NelderMeadResult& result_;
};

// x = a + coeff * (b - a)
void affine(const std::vector<double>& a, const std::vector<double>& b, double coeff,
            std::vector<double>& out) {
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + coeff * (b[i] - a[i]);
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
  options.validate();
  if (x0.empty()) throw std::invalid_argument("nelder_mead: empty starting point");
  if (!std::all_of(x0.begin(), x0.end(), [](double v) { return std::isfinite(v); }))
    throw std::invalid_argument("nelder_mead: starting point must be finite");

  const std::size_t n = x0.size();
  NelderMeadResult result;
  Simplex simplex(f, options, result);

  std::vector<Vertex> v;
  v.reserve(n + 1);
  v.push_back({x0, simplex.eval(x0)});
  result.f_initial = v.front().f;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x = x0;
    x[i] += options.initial_step;
    const double fx = simplex.eval(x);
    v.push_back({std::move(x), fx});
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  std::stable_sort(v.begin(), v.end(), by_value);

  auto target_hit = [&] { return options.target_value && v.front().f <= *options.target_value; };

  std::vector<double> centroid(n), xr, xe, xc;
  while (result.iterations < options.max_iterations && simplex.budget_left()) {
    if (target_hit()) {
      result.reached_target = true;
      break;
    }
    if (v.back().f - v.front().f < options.tolerance) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += v[k].x[i];
    for (auto& c : centroid) c /= static_cast<double>(n);

    Vertex& worst = v.back();
    const double f_best = v.front().f;
    const double f_second_worst = v[n - 1].f;

    affine(centroid, worst.x, -options.reflection, xr);
    const double fr = simplex.eval(xr);

    bool do_shrink = false;
    if (fr < f_best) {
      affine(centroid, xr, options.expansion / options.reflection, xe);
      const double fe = simplex.eval(xe);
      if (fe < fr)
        worst = {xe, fe};
      else
        worst = {xr, fr};
    } else if (fr < f_second_worst) {
      worst = {xr, fr};
    } else if (fr < worst.f) {
      affine(centroid, xr, options.contraction, xc);
      const double fc = simplex.eval(xc);
      if (fc <= fr)
        worst = {xc, fc};
      else
        do_shrink = true;
    } else {
      affine(centroid, worst.x, options.contraction, xc);
      const double fc = simplex.eval(xc);
      if (fc < worst.f)
        worst = {xc, fc};
      else
        do_shrink = true;
    }

    if (do_shrink) {
      const std::vector<double> best = v.front().x;
      for (std::size_t k = 1; k <= n; ++k) {
        affine(best, v[k].x, options.shrink, v[k].x);
        v[k].f = simplex.eval(v[k].x);
      }
    }

    std::stable_sort(v.begin(), v.end(), by_value);
    ++result.iterations;
    result.history.push_back(v.front().f);
  }
  if (!result.reached_target && target_hit()) result.reached_target = true;

  result.x_best = v.front().x;
  result.f_best = v.front().f;
  return result;
}

}  // namespace jcqoc
