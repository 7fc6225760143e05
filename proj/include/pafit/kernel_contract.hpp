#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pafit/graph.hpp"

namespace pafit {

enum class Verdict { Pass, Fail, Inconclusive };

std::string_view to_string(Verdict v);

/// Fail dominates, then Inconclusive, then Pass.
Verdict combine(Verdict a, Verdict b);

struct ContractOptions {
  std::uint64_t trials = 20000;      // resamples per frozen state (A1, A2, A3, A5)
  std::uint64_t a4_trials = 100000;  // resamples per frozen state for the A4 trend
  double significance = 1e-3;        // family-wise, Bonferroni over tests
  std::size_t tested_vertices = 8;   // half by largest weight, half weight-proportional
  std::vector<std::uint64_t> a4_impacts{1, 2, 3};
  std::uint64_t seed = 1;
};

/// T x m matrix of increments of the tested vertices, resampled from a frozen
/// state. Row t comes from stream derive_seed(derive_seed(seed, n), t), so
/// the matrix does not depend on how trials are spread over threads.
struct FrozenSample {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  std::vector<std::size_t> vertices;
  std::vector<double> expected;        // F_i Z_n(i) / (n fbar)
  std::vector<std::uint64_t> counts;   // row-major [trial][vertex]

  std::uint64_t at(std::uint64_t t, std::size_t j) const { return counts[t * vertices.size() + j]; }
};

/// Vertices under test: the largest expected increments first, then
/// weight-proportional draws (deterministic in seed and n).
std::vector<std::size_t> choose_vertices(const GraphState& state, std::size_t count, std::uint64_t seed);

/// OpenMP-parallel over trials.
FrozenSample resample(const AttachmentModel& model, const GraphState& state, const std::vector<std::size_t>& vertices,
                      std::uint64_t trials, std::uint64_t seed);

namespace reference {
FrozenSample resample_serial(const AttachmentModel& model, const GraphState& state,
                             const std::vector<std::size_t>& vertices, std::uint64_t trials, std::uint64_t seed);
}  // namespace reference

struct VertexMoment {
  std::size_t vertex;
  double expected;
  double mean;
  double variance;
  double z;  // (mean - expected) / stderr; 0 when degenerate
  Verdict verdict;
};

struct A1Result {
  Verdict verdict = Verdict::Inconclusive;
  double threshold = 0.0;
  double worst_abs_z = 0.0;
  std::vector<VertexMoment> vertices;
};

A1Result check_A1(const FrozenSample& sample, double significance);
A1Result check_A1(const AttachmentModel& model, const GraphState& state, const ContractOptions& opts);

/// max_i Var / E over vertices with at least one hit; NaN when none qualifies.
double variance_ratio(const FrozenSample& sample);

struct A2Result {
  Verdict verdict = Verdict::Inconclusive;
  double c_var = 0.0;  // largest ratio seen
  double slope = 0.0;  // least-squares slope of log ratio against log n
  std::vector<std::uint64_t> n;
  std::vector<double> ratio;
};

/// Fails only on systematic growth: slope > 1/2 and the last ratio more than
/// twice the first.
A2Result check_A2(const std::vector<FrozenSample>& samples);

struct PairCheck {
  Verdict a3 = Verdict::Inconclusive;
  Verdict a5 = Verdict::Inconclusive;
  double threshold = 0.0;
  double worst_a3_z = 0.0;  // largest cov / se (positive is bad)
  double worst_a5_z = 0.0;  // largest indicator cov / se (positive is bad)
  std::size_t pairs = 0;
};

/// A3: Cov(D_i, D_j) <= 0; A5: Cov(1{D_i <= k}, 1{D_j <= l}) <= 0 for
/// k, l in {0, 1, 2}; each up to max(3, Bonferroni z) standard errors.
PairCheck check_A3_A5(const FrozenSample& sample, double significance);
PairCheck check_A3_A5(const AttachmentModel& model, const GraphState& state, const ContractOptions& opts);

struct A4Point {
  std::uint64_t n = 0;
  std::uint64_t impact_k = 0;
  std::uint64_t vertices = 0;   // |{i : Z_n(i) = k}|
  std::uint64_t events = 0;     // (trial, vertex) pairs with D_i >= 2
  std::uint64_t heavy = 0;      // sum of D_i over those pairs
  std::uint64_t singles = 0;    // (trial, vertex) pairs with D_i = 1
  double expected_sum = 0.0;    // sum_i F_i k / (n fbar)
  double ge2 = 0.0, ge2_lo = 0.0, ge2_hi = 0.0;      // n * mean_i P(D_i >= 2)
  double heavy_mean = 0.0, heavy_lo = 0.0, heavy_hi = 0.0;  // n * mean_i E[D_i; D_i >= 2]
  double single_dev = 0.0;      // n * mean_i (P(D_i = 1) - F_i k / (n fbar))
};

struct A4Result {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<A4Point> points;  // grouped by k, ordered by n
};

/// Statistics for every k in `impacts` from one batch of resamples.
std::vector<A4Point> a4_statistics(const AttachmentModel& model, const GraphState& state,
                                   const std::vector<std::uint64_t>& impacts, std::uint64_t trials,
                                   std::uint64_t seed, double significance);

/// Trend verdict: pass when the final upper bound falls below the first lower
/// bound, fail when the final lower bound stays above first upper bound times
/// (n_first / n_last)^{1/4}, inconclusive otherwise.
Verdict a4_trend(const std::vector<A4Point>& along_n);

A4Result check_A4(const AttachmentModel& model, const std::vector<const GraphState*>& states,
                  const ContractOptions& opts);

struct ContractReport {
  std::string model;
  Verdict a1 = Verdict::Inconclusive;
  Verdict a2 = Verdict::Inconclusive;
  Verdict a3 = Verdict::Inconclusive;
  Verdict a4 = Verdict::Inconclusive;
  Verdict a5 = Verdict::Inconclusive;
  double c_var = 0.0;
  double worst_a1_z = 0.0;
  double worst_a3_z = 0.0;
  double worst_a5_z = 0.0;
  std::vector<std::uint64_t> states_n;
  std::vector<std::uint64_t> impacts_k;
  A2Result a2_detail;
  A4Result a4_detail;

  bool all_pass() const;
  std::string to_json() const;
};

/// Full suite over frozen states along one trajectory (sorted by n).
ContractReport check_contract(const AttachmentModel& model, const std::vector<const GraphState*>& states,
                              const ContractOptions& opts);

/// Demo kernels, each built to break a particular assumption:
///   "uniform" ignores weights (A1), "burst" has Var/E ~ n^{3/4} (A2),
///   "coupled" attaches to a vertex and its neighbour together (A3, A5),
///   "paired" always attaches edges in pairs (A4).
/// Breaking one assumption may drag others down with it (burst also fails
/// A1 and A4 at these sample sizes).
AttachmentModel pathological_kernel(std::string_view name);
std::vector<std::string> pathological_kernel_names();

}  // namespace pafit
