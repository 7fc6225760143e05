#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pafit/graph.hpp"
#include "pafit/simulator.hpp"

namespace pafit {

struct ReplicaPlan {
  FitnessDistribution dist = FitnessDistribution::uniform();
  double lambda = 1.0;
  AttachmentModel model = AttachmentModel::m1();
  std::uint64_t n_target = 1;
  RunOptions run;
  std::size_t replicas = 1;
  std::uint64_t base_seed = 0;
};

struct ReplicaResult {
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  std::vector<EmpiricalSnapshot> trajectory;
  std::uint64_t edges = 0;
  std::string error;  // non-empty when the replica aborted (audit failure, ...)

  bool ok() const { return error.empty(); }
};

/// Replica r runs on stream derive_seed(base_seed, r). Replicas are spread
/// over `threads` OpenMP threads (0: runtime default); results come back
/// sorted by replica index, so output never depends on completion order.
std::vector<ReplicaResult> run_replicas(const ReplicaPlan& plan, int threads = 0);

namespace reference {
std::vector<ReplicaResult> run_replicas_serial(const ReplicaPlan& plan);
}  // namespace reference

/// Snapshots of every replica at checkpoint index c.
std::vector<EmpiricalSnapshot> at_checkpoint(const std::vector<ReplicaResult>& results, std::size_t c);

}  // namespace pafit
