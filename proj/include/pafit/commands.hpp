#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pafit/config.hpp"
#include "pafit/empirics.hpp"
#include "pafit/verification.hpp"

namespace pafit {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitChecksFailed = 1,
  kExitUsage = 2,
  kExitAuditFailure = 3,
};

inline constexpr const char* kOutDirEnv = "PAFIT_OUT_DIR";

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::size_t> replicas;
  std::optional<std::uint64_t> seed;
};

/// Flag beats environment beats config file; the environment variable may
/// only replace the output directory. Re-validates the result.
ExperimentConfig apply_overrides(ExperimentConfig config, const Overrides& flags, const char* env_out_dir);

int cmd_theory(const ExperimentConfig& config, std::ostream& log);
int cmd_simulate(const ExperimentConfig& config, int threads, std::ostream& log);
int cmd_compare(const ExperimentConfig& config, const std::string& run_dir, const std::string& theory_file,
                std::ostream& log);
int cmd_check_kernel(const ExperimentConfig& config, std::ostream& log);

// File formats (exposed for tests).
std::string theory_json(const TheoryTables& t);
TheoryTables parse_theory_json(const std::string& text);

struct RunAggregates {
  double lambda = 0.0;
  std::string fitness;
  std::string model;
  std::size_t replicas = 0;
  std::size_t bins = 0;
  std::size_t max_k = 0;
  double epsilon = 0.0;
  std::vector<SnapshotAggregate> checkpoints;
};

std::string aggregates_json(const RunAggregates& r);
RunAggregates parse_aggregates_json(const std::string& text);

}  // namespace pafit
