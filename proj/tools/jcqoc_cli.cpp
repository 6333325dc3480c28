#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "jcqoc/app/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"State preparation on a Jaynes-Cummings lattice: ground states, ramps, optimal pulses"};
  app.set_version_flag("--version", JCQOC_VERSION);
  app.require_subcommand(1, 1);

  std::string config;
  jcqoc::app::Overrides o;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  std::optional<double> dt;

  for (const auto& name : jcqoc::app::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out, "Override the output directory");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--dt", dt, "Override the report time step");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : jcqoc::app::kInvalidConfig;
  }
  o.seed = seed;
  o.out = out;
  o.workers = workers;
  o.dt = dt;
  const std::string name = app.get_subcommands().front()->get_name();
  return jcqoc::app::run_main(name, config, o, std::cerr);
}
