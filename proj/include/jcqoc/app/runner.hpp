#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jcqoc/app/config.hpp"

namespace jcqoc::app {

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 1,
  kAccuracyFailure = 2,
  kThresholdNotFound = 3,
  kInternalError = 4,
};

const std::vector<std::string>& subcommands();

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  std::optional<double> dt;
};

/// Applies overrides and re-validates.
RunConfig apply_overrides(RunConfig cfg, const Overrides& o);

/// Runs one subcommand, writing artifacts under <output_dir>/<subcommand>/.
/// Errors propagate as exceptions; nothing is written if the config or
/// pulse file is rejected.
int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log);

/// Loads, overrides, runs, and maps exceptions to exit codes.
int run_main(const std::string& subcommand, const std::filesystem::path& config_path,
             const Overrides& o, std::ostream& log);

}  // namespace jcqoc::app
