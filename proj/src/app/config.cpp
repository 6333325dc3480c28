#include "jcqoc/app/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <type_traits>

#include "jcqoc/errors.hpp"

namespace jcqoc::app {

using nlohmann::json;

std::vector<double> GridSpec::values() const {
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k)
    v[k] = count == 1 ? start
                      : start * (1.0 - double(k) / double(count - 1)) + stop * double(k) / double(count - 1);
  return v;
}

double RunConfig::report_dt(double t) const { return dt ? *dt : t / 4000.0; }

namespace {

// Reads sections while tracking which keys were consumed, so typos surface
// as config errors instead of silently falling back to defaults.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail("unknown key '" + k + "'");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
      if (!j_.at(key).is_number_unsigned()) fail("'" + key + "' must be a non-negative integer");
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail("bad value for '" + key + "'");
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  /// Times may be given as `key` or as `key_pi` in units of pi.
  void get_time(const std::string& key, double& out) {
    const bool abs = has(key), pi = has(key + "_pi");
    if (abs && pi) fail("give either '" + key + "' or '" + key + "_pi', not both");
    if (abs) get(key, out);
    if (pi) {
      get(key + "_pi", out);
      out *= std::numbers::pi;
    }
  }

  void get_times(const std::string& key, std::vector<double>& out) {
    const bool abs = has(key), pi = has(key + "_pi");
    if (abs && pi) fail("give either '" + key + "' or '" + key + "_pi', not both");
    if (abs) get(key, out);
    if (pi) {
      get(key + "_pi", out);
      for (double& t : out) t *= std::numbers::pi;
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, path_ + key + ".");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config " + (path_.empty() ? std::string("root") : path_.substr(0, path_.size() - 1)) +
                      ": " + msg);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_couplings(Section s, Couplings& c) {
  s.get("g", c.g);
  s.get("j", c.j_hop);
  s.finish();
}

void read_grid(Section s, GridSpec& g) {
  s.get("start", g.start);
  s.get("stop", g.stop);
  s.get("count", g.count);
  s.finish();
}

AngularConvention parse_convention(const std::string& s) {
  if (s == "literal") return AngularConvention::literal;
  if (s == "two_pi") return AngularConvention::two_pi;
  throw ConfigError("config: angular_convention must be 'literal' or 'two_pi'");
}

std::string convention_name(AngularConvention c) {
  return c == AngularConvention::literal ? "literal" : "two_pi";
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  c.total_time = 3.30 * std::numbers::pi;
  Section root(j, "");

  {
    Section s = root.sub("lattice");
    s.get("n_sites", c.lattice.n_sites);
    s.get("n_excitations", c.lattice.n_excitations);
    s.get("fock_cutoff", c.lattice.fock_cutoff);
    s.get("omega_c", c.lattice.omega_c);
    s.get("periodic", c.lattice.periodic);
    s.finish();
  }
  read_couplings(root.sub("initial"), c.initial);
  read_couplings(root.sub("target"), c.target);
  double delta = 0.0;
  root.get("delta", delta);
  c.initial.delta = c.target.delta = delta;
  c.lattice.omega_z = c.lattice.omega_c - delta;
  {
    Section s = root.sub("constraints");
    s.get("g_max", c.constraints.g_max);
    s.get("j_max", c.constraints.j_max);
    s.finish();
  }
  root.get("schedule", c.schedule);
  root.get_time("total_time", c.total_time);
  root.get("dt", c.dt);
  std::string conv = convention_name(c.convention);
  root.get("angular_convention", conv);
  c.convention = parse_convention(conv);
  root.get("pulse_file", c.pulse_file);
  root.get("sample_every", c.sample_every);
  root.get("waveform_samples", c.waveform_samples);
  {
    Section s = root.sub("optimizer");
    auto& nm = c.optimizer.nelder_mead;
    s.get("max_iterations", nm.max_iterations);
    s.get("max_evaluations", nm.max_evaluations);
    s.get("tolerance", nm.tolerance);
    s.get("initial_step", nm.initial_step);
    s.get("reflection", nm.reflection);
    s.get("expansion", nm.expansion);
    s.get("contraction", nm.contraction);
    s.get("shrink", nm.shrink);
    s.get("adaptive", c.optimizer.adaptive);
    s.get("restarts", c.optimizer.restarts);
    s.get("threshold_fidelity", c.optimizer.threshold_fidelity);
    s.get("stop_at_threshold", c.optimizer.stop_at_threshold);
    s.get("stop_after_success", c.optimizer.stop_after_success);
    s.get("coef_range", c.optimizer.init.coef_range);
    s.get("offset_range", c.optimizer.init.offset_range);
    s.get("steps", c.optimizer.steps);
    s.finish();
  }
  {
    Section s = root.sub("ground");
    if (s.has("points")) {
      const json& pts = j.at("ground").at("points");
      if (!pts.is_array()) s.fail("points must be an array");
      for (std::size_t k = 0; k < pts.size(); ++k) {
        Couplings cp{0.0, 0.0, delta};
        read_couplings(Section(pts[k], "ground.points[" + std::to_string(k) + "]."), cp);
        c.ground_points.push_back(cp);
      }
    } else {
      c.ground_points = {c.initial, c.target};
    }
    s.finish();
  }
  {
    Section s = root.sub("spdm_map");
    s.get("g", c.spdm_map.g);
    read_grid(s.sub("j"), c.spdm_map.j);
    read_grid(s.sub("delta"), c.spdm_map.delta);
    s.get("site_i", c.spdm_map.site_i);
    s.get("site_j", c.spdm_map.site_j);
    s.finish();
  }
  {
    Section s = root.sub("adiabatic");
    s.get_times("times", c.adiabatic_times);
    s.finish();
  }
  {
    Section s = root.sub("sweep");
    s.get_times("times", c.sweep_times);
    s.finish();
  }
  {
    Section s = root.sub("threshold");
    s.get_times("grid", c.threshold_grid);
    s.get_time("refine_step", c.threshold_refine);
    s.finish();
  }
  {
    Section s = root.sub("qsl");
    s.get_times("times", c.qsl_times);
    s.finish();
  }
  {
    Section s = root.sub("noise");
    s.get("sigmas", c.noise_sigmas);
    s.get("samples", c.noise_samples);
    s.get("grid_points", c.noise_grid_points);
    s.finish();
  }
  {
    Section s = root.sub("lindblad");
    s.get("kappa", c.rates.kappa);
    s.get("gamma", c.rates.gamma);
    s.get("gamma_d", c.rates.gamma_d);
    s.get("dt", c.lindblad_dt);
    s.finish();
  }
  root.get("output_dir", c.output_dir);
  root.get("seed", c.seed);
  root.get("workers", c.workers);
  root.finish();

  c.validate();
  return c;
}

void RunConfig::validate() const {
  lattice.validate();
  constraints.validate();
  require(schedule == "crab" || schedule == "adiabatic", "schedule must be 'crab' or 'adiabatic'");
  require(positive(total_time), "total_time must be > 0");
  if (dt) {
    require(positive(*dt), "dt must be > 0");
    require(*dt < total_time, "dt must be smaller than total_time");
  }
  for (const Couplings* cp : {&initial, &target}) {
    require(std::isfinite(cp->g) && std::isfinite(cp->j_hop), "couplings must be finite");
    require(std::abs(cp->g) <= constraints.g_max && std::abs(cp->j_hop) <= constraints.j_max,
            "boundary couplings exceed the constraints");
  }
  require(sample_every >= 1, "sample_every must be >= 1");
  require(waveform_samples >= 2, "waveform_samples must be >= 2");
  NelderMeadOptions nm = optimizer.nelder_mead;
  nm.validate();
  require(optimizer.restarts >= 1, "optimizer.restarts must be >= 1");
  require(optimizer.threshold_fidelity > 0.0 && optimizer.threshold_fidelity <= 1.0,
          "optimizer.threshold_fidelity must be in (0, 1]");
  require(optimizer.init.coef_range >= 0.0 && optimizer.init.offset_range >= 0.0,
          "optimizer init ranges must be >= 0");
  require(optimizer.steps >= 1, "optimizer.steps must be >= 1");
  require(ground_points.size() >= 1, "ground.points must not be empty");
  for (const auto* g : {&spdm_map.j, &spdm_map.delta})
    require(g->count >= 1 && std::isfinite(g->start) && std::isfinite(g->stop), "spdm_map grids need count >= 1");
  require(spdm_map.site_i >= 1 && spdm_map.site_i <= lattice.n_sites && spdm_map.site_j >= 1 &&
              spdm_map.site_j <= lattice.n_sites,
          "spdm_map sites out of range");
  auto check_times = [&](const std::vector<double>& ts, const char* what) {
    for (double t : ts) {
      require(positive(t), std::string(what) + " must be > 0");
      if (dt) require(*dt < t, std::string("dt must be smaller than every ") + what);
    }
  };
  check_times(adiabatic_times, "adiabatic.times");
  check_times(sweep_times, "sweep.times");
  check_times(threshold_grid, "threshold.grid");
  check_times(qsl_times, "qsl.times");
  require(threshold_refine >= 0.0, "threshold.refine_step must be >= 0");
  for (double s : noise_sigmas) require(std::isfinite(s) && s >= 0.0, "noise.sigmas must be >= 0");
  require(noise_samples >= 1, "noise.samples must be >= 1");
  require(noise_grid_points >= 1, "noise.grid_points must be >= 1");
  rates.validate();
  require(lindblad_dt >= 0.0 && lindblad_dt < total_time, "lindblad.dt must be in [0, total_time)");
  require(!output_dir.empty(), "output_dir must not be empty");
  require(workers >= 1, "workers must be >= 1");
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  auto couplings = [](const Couplings& cp) { return json{{"g", cp.g}, {"j", cp.j_hop}}; };
  auto grid = [](const GridSpec& g) { return json{{"start", g.start}, {"stop", g.stop}, {"count", g.count}}; };
  const auto& nm = c.optimizer.nelder_mead;
  json ground = json::array();
  for (const auto& p : c.ground_points) ground.push_back(couplings(p));
  json j{
      {"lattice",
       {{"n_sites", c.lattice.n_sites},
        {"n_excitations", c.lattice.n_excitations},
        {"fock_cutoff", c.lattice.fock_cutoff},
        {"omega_c", c.lattice.omega_c},
        {"periodic", c.lattice.periodic}}},
      {"initial", couplings(c.initial)},
      {"target", couplings(c.target)},
      {"delta", c.initial.delta},
      {"constraints", {{"g_max", c.constraints.g_max}, {"j_max", c.constraints.j_max}}},
      {"schedule", c.schedule},
      {"total_time", c.total_time},
      {"dt", c.dt ? json(*c.dt) : json(nullptr)},
      {"angular_convention", convention_name(c.convention)},
      {"pulse_file", c.pulse_file ? json(*c.pulse_file) : json(nullptr)},
      {"sample_every", c.sample_every},
      {"waveform_samples", c.waveform_samples},
      {"optimizer",
       {{"max_iterations", nm.max_iterations},
        {"max_evaluations", nm.max_evaluations},
        {"tolerance", nm.tolerance},
        {"initial_step", nm.initial_step},
        {"reflection", nm.reflection},
        {"expansion", nm.expansion},
        {"contraction", nm.contraction},
        {"shrink", nm.shrink},
        {"adaptive", c.optimizer.adaptive},
        {"restarts", c.optimizer.restarts},
        {"threshold_fidelity", c.optimizer.threshold_fidelity},
        {"stop_at_threshold", c.optimizer.stop_at_threshold},
        {"stop_after_success", c.optimizer.stop_after_success},
        {"coef_range", c.optimizer.init.coef_range},
        {"offset_range", c.optimizer.init.offset_range},
        {"steps", c.optimizer.steps}}},
      {"ground", {{"points", ground}}},
      {"spdm_map",
       {{"g", c.spdm_map.g},
        {"j", grid(c.spdm_map.j)},
        {"delta", grid(c.spdm_map.delta)},
        {"site_i", c.spdm_map.site_i},
        {"site_j", c.spdm_map.site_j}}},
      {"adiabatic", {{"times", c.adiabatic_times}}},
      {"sweep", {{"times", c.sweep_times}}},
      {"threshold", {{"grid", c.threshold_grid}, {"refine_step", c.threshold_refine}}},
      {"qsl", {{"times", c.qsl_times}}},
      {"noise",
       {{"sigmas", c.noise_sigmas}, {"samples", c.noise_samples}, {"grid_points", c.noise_grid_points}}},
      {"lindblad",
       {{"kappa", c.rates.kappa}, {"gamma", c.rates.gamma}, {"gamma_d", c.rates.gamma_d}, {"dt", c.lindblad_dt}}},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
      {"workers", c.workers},
  };
  return j;
}

std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  // Where results go and how many threads compute them does not change them.
  j.erase("output_dir");
  j.erase("workers");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace jcqoc::app
