#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "jcqoc/controls.hpp"
#include "jcqoc/fockspace.hpp"
#include "jcqoc/lindblad.hpp"
#include "jcqoc/model.hpp"
#include "jcqoc/optimizer.hpp"

namespace jcqoc::app {

inline constexpr int kSchemaVersion = 1;

struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 1;
  std::vector<double> values() const;
};

struct OptimizerConfig {
  NelderMeadOptions nelder_mead;
  bool adaptive = false;
  std::size_t restarts = 5;
  double threshold_fidelity = 0.99;
  bool stop_at_threshold = false;
  bool stop_after_success = true;
  InitDistribution init;
  std::size_t steps = 2000;
};

struct SpdmMapConfig {
  double g = 1.0;
  GridSpec j{0.0, 1.0, 21};
  GridSpec delta{-2.0, 2.0, 21};
  int site_i = 1;
  int site_j = 3;
};

struct RunConfig {
  LatticeConfig lattice;
  Couplings initial{0.0, 0.5, 0.0};
  Couplings target{1.0, 0.02, 0.0};
  Constraints constraints{1.0, 2.0};
  std::string schedule = "crab";
  double total_time = 0.0;
  std::optional<double> dt;
  AngularConvention convention = AngularConvention::literal;
  OptimizerConfig optimizer;
  std::optional<std::string> pulse_file;
  std::size_t sample_every = 10;
  std::size_t waveform_samples = 401;

  std::vector<Couplings> ground_points;
  SpdmMapConfig spdm_map;
  std::vector<double> adiabatic_times;
  std::vector<double> sweep_times;
  std::vector<double> threshold_grid;
  double threshold_refine = 0.0;
  std::vector<double> qsl_times;
  std::vector<double> noise_sigmas{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
  std::size_t noise_samples = 200;
  int noise_grid_points = 100;
  DecoherenceRates rates = reference_rates();
  double lindblad_dt = 0.0;

  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  /// Integration step for reported values at total time T.
  double report_dt(double t) const;
  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Parses and validates. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Fully expanded form of a config; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace jcqoc::app
