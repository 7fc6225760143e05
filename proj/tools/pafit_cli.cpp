#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pafit/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Preferential attachment with fitness: limit theory, simulation and checks"};
  app.require_subcommand(1);

  std::string config_path;
  pafit::Overrides flags;
  int threads = 0;
  std::string run_dir;
  std::string theory_file;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "Output directory (overrides config and $PAFIT_OUT_DIR)");
    sub->add_option("--seed", flags.seed, "Base seed");
  };

  auto* theory = app.add_subcommand("theory", "Limit predictions: phase, theta*, Gamma, Gamma^(k), p(k)");
  common(theory);
  auto* simulate = app.add_subcommand("simulate", "Run replicas and write snapshots and aggregates");
  common(simulate);
  simulate->add_option("--replicas", flags.replicas, "Number of replicas")->check(CLI::PositiveNumber);
  simulate->add_option("--threads", threads, "Worker threads (default: all available)")->check(CLI::NonNegativeNumber);
  auto* compare = app.add_subcommand("compare", "Check a run against theory output");
  common(compare);
  compare->add_option("--run", run_dir, "Run directory (default: output directory)");
  compare->add_option("--theory", theory_file, "Theory file (default: <output>/theory.json)");
  auto* check = app.add_subcommand("check-kernel", "Monte Carlo checks of the attachment kernel");
  common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pafit::kExitOk : pafit::kExitUsage;
  }

  try {
    const auto config = pafit::apply_overrides(pafit::load_config(config_path), flags, std::getenv(pafit::kOutDirEnv));
    if (*theory) return pafit::cmd_theory(config, std::cout);
    if (*simulate) return pafit::cmd_simulate(config, threads, std::cout);
    if (*compare) {
      if (run_dir.empty()) run_dir = config.output_dir;
      if (theory_file.empty()) theory_file = config.output_dir + "/theory.json";
      return pafit::cmd_compare(config, run_dir, theory_file, std::cout);
    }
    if (*check) return pafit::cmd_check_kernel(config, std::cout);
  } catch (const pafit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pafit::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pafit::kExitUsage;
  }
  return pafit::kExitUsage;
}
