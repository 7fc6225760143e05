#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pafit/graph.hpp"
#include "pafit/kernel_contract.hpp"
#include "pafit/measures.hpp"
#include "pafit/replicas.hpp"

namespace pafit {

/// Malformed or out-of-range configuration. Raised before any work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

struct ModelSpec {
  std::string type = "M1";  // "M1", "M2" or "custom"
  std::string kernel;       // demo kernel name when type == "custom"

  AttachmentModel build() const;
};

/// Fitness law exactly as written in the file (before rescaling to ess sup 1).
struct FitnessSpec {
  std::string type = "uniform";  // "uniform", "discrete", "density", "beta"
  std::vector<DiscretePoint> points;
  std::vector<double> edges;
  std::vector<std::vector<double>> coeffs;
  double alpha = 1.0;
  double beta = 1.0;
  double upper = 1.0;
  double atom_at_one = 0.0;

  RawDistribution raw() const;
  FitnessDistribution build() const { return normalize_esssup(raw()); }
};

struct KernelCheckSpec {
  std::vector<std::uint64_t> checkpoints{100, 1000, 10000};
  std::uint64_t trials = 20000;
  std::uint64_t a4_trials = 100000;
  double significance = 1e-3;
  std::size_t tested_vertices = 8;

  ContractOptions options(std::uint64_t seed) const;
};

struct ExperimentConfig {
  ModelSpec model;
  double lambda = 1.0;
  FitnessSpec fitness;
  std::uint64_t n_target = 1000;
  std::vector<std::uint64_t> checkpoints;  // empty: geometric schedule
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  std::size_t bins = 20;
  std::size_t max_impact = 10;
  double epsilon = 0.1;
  std::string output_dir = "out";
  std::optional<KernelCheckSpec> kernel_check;

  /// Throws ConfigError on the first invalid field.
  void validate() const;

  std::vector<std::uint64_t> schedule() const;
  ReplicaPlan plan() const;
  SnapshotOptions snapshot_options() const { return {bins, max_impact, epsilon}; }
};

/// Parse and validate; unknown keys anywhere are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical serialisation; parse_config(to_json(c)) reproduces c exactly.
std::string to_json(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace pafit
