#include "pafit/replicas.hpp"

#include <stdexcept>

#include <omp.h>

namespace pafit {

namespace {

ReplicaResult run_one(const ReplicaPlan& plan, std::size_t r) {
  ReplicaResult out;
  out.replica = r;
  out.seed = derive_seed(plan.base_seed, r);
  try {
    GraphState state(plan.dist, plan.lambda, plan.model, out.seed);
    out.trajectory = run(state, plan.n_target, plan.run);
    out.edges = state.edges();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

void validate(const ReplicaPlan& plan) {
  if (plan.replicas == 0) throw std::invalid_argument("need at least one replica");
  if (plan.n_target == 0) throw std::invalid_argument("n_target must be positive");
  plan.model.validate(plan.lambda);
}

}  // namespace

std::vector<ReplicaResult> run_replicas(const ReplicaPlan& plan, int threads) {
  validate(plan);
  std::vector<ReplicaResult> results(plan.replicas);
  const auto count = static_cast<std::int64_t>(plan.replicas);
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (std::int64_t r = 0; r < count; ++r) {
    const auto idx = static_cast<std::size_t>(r);
    results[idx] = run_one(plan, idx);
  }
  return results;
}

namespace reference {

std::vector<ReplicaResult> run_replicas_serial(const ReplicaPlan& plan) {
  validate(plan);
  std::vector<ReplicaResult> results;
  for (std::size_t r = 0; r < plan.replicas; ++r) results.push_back(run_one(plan, r));
  return results;
}

}  // namespace reference

std::vector<EmpiricalSnapshot> at_checkpoint(const std::vector<ReplicaResult>& results, std::size_t c) {
  std::vector<EmpiricalSnapshot> out;
  for (const auto& r : results) {
    if (!r.ok()) throw std::runtime_error("replica " + std::to_string(r.replica) + " failed: " + r.error);
    if (c >= r.trajectory.size()) throw std::out_of_range("checkpoint index beyond trajectory");
    out.push_back(r.trajectory[c]);
  }
  return out;
}

}  // namespace pafit
