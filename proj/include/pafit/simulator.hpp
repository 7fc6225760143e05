#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pafit/empirics.hpp"
#include "pafit/graph.hpp"

namespace pafit {

/// Powers of two up to n_target, plus n_target itself.
std::vector<std::uint64_t> geometric_schedule(std::uint64_t n_target);

using Observer = std::function<void(const GraphState&, const EmpiricalSnapshot&)>;

struct RunOptions {
  std::vector<std::uint64_t> schedule;  // empty: geometric
  SnapshotOptions snapshot;
};

/// Advances the state to n_target, taking a snapshot (after a full audit) at
/// every checkpoint in the schedule that is >= the current size. Observers see
/// the state and snapshot at each checkpoint.
std::vector<EmpiricalSnapshot> run(GraphState& state, std::uint64_t n_target, const RunOptions& opts,
                                   const std::vector<Observer>& observers = {});

/// Time-averaged F-bar over the second half of a trajectory against the a
/// priori corridor [int x dmu / lambda - slack, (1 + lambda) / lambda + slack].
struct FbarCorridor {
  double average = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool inside = false;
};

FbarCorridor fbar_corridor(const std::vector<EmpiricalSnapshot>& trajectory, const FitnessDistribution& dist,
                           double lambda, double slack = 0.05);

}  // namespace pafit
