#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pafit/graph.hpp"
#include "pafit/limit_theory.hpp"

namespace pafit {

/// B equal bins on (0, 1]; bin b is (b/B, (b+1)/B]. Assignment compares
/// against the same edge doubles used for predicted masses, so an atom that
/// sits on an edge lands in the same bin on both sides.
class Binning {
 public:
  explicit Binning(std::size_t bins);
  std::size_t bins() const { return bins_; }
  double edge(std::size_t b) const { return static_cast<double>(b) / static_cast<double>(bins_); }
  Window window(std::size_t b) const { return {edge(b), edge(b + 1)}; }
  std::size_t bin_of(double f) const;

 private:
  std::size_t bins_;
};

struct BinnedMeasure {
  std::vector<double> mass;
  double total() const;
};

struct SnapshotOptions {
  std::size_t bins = 100;
  std::size_t max_k = 10;
  double epsilon = 0.01;
};

/// Empirical measures of G_n. Counts are exact integers; masses divide by n.
struct EmpiricalSnapshot {
  std::uint64_t n = 0;
  double lambda = 0.0;
  double fbar = 0.0;
  std::uint64_t total_impact = 0;
  std::uint64_t max_impact = 0;
  double fitness_of_max = 0.0;
  std::size_t bins = 0;
  std::size_t max_k = 0;
  double epsilon = 0.0;

  std::vector<std::uint64_t> impact_per_bin;  // sum of Z_n(i) over bin
  std::vector<std::uint64_t> count_k_bin;     // row k-1: #{i in bin : Z_n(i) = k}
  std::vector<std::uint64_t> count_k;         // #{i : Z_n(i) = k}, k = 1..K
  std::uint64_t count_tail = 0;               // #{i : Z_n(i) > K}
  std::uint64_t top_window_impact = 0;        // sum of Z_n(i) over F_i >= 1 - epsilon

  BinnedMeasure gamma() const;
  BinnedMeasure gamma_k(std::size_t k) const;
  double pk(std::size_t k) const;
  double tail_fraction() const;
  double total_mass() const { return static_cast<double>(total_impact) / static_cast<double>(n); }
  double top_window_mass() const { return static_cast<double>(top_window_impact) / static_cast<double>(n); }

  bool operator==(const EmpiricalSnapshot&) const = default;
};

/// One pass over the vertices; OpenMP-parallel above a size threshold, with
/// per-thread integer histograms. Integer merging (and lowest-index tie
/// breaking for the maximum) makes the result independent of the thread
/// count and merge order.
EmpiricalSnapshot snapshot(const GraphState& state, const SnapshotOptions& opts);

namespace reference {
/// Serial single-threaded snapshot, kept as the oracle for the parallel kernel.
EmpiricalSnapshot snapshot_serial(const GraphState& state, const SnapshotOptions& opts);
}  // namespace reference

/// Predicted bin masses of a limit measure (atom at 1 lands in the last bin).
BinnedMeasure predict_binned(const LimitMeasure& limit, const FitnessDistribution& dist, const Binning& binning);

struct DistanceReport {
  std::vector<double> empirical;
  std::vector<double> predicted;
  std::vector<double> abs_error;
  double max_error = 0.0;
  double l1 = 0.0;
};

DistanceReport compare_binned(const BinnedMeasure& empirical, const BinnedMeasure& predicted);

DistanceReport compare_gamma(const EmpiricalSnapshot& snap, const LimitMeasure& limit,
                             const FitnessDistribution& dist);

struct CondensationDiagnostic {
  double empirical;  // Gamma_n([1 - eps, 1])
  double predicted;  // Gamma([1 - eps, 1])
  double mu_only;    // part of the prediction carried by the density factor alone
};

/// Uses the snapshot's own epsilon; the snapshot must have been taken with it.
CondensationDiagnostic condensation_diagnostic(const EmpiricalSnapshot& snap, const LimitMeasure& limit,
                                               const FitnessDistribution& dist);

/// Predicted Gamma([1 - eps, 1]).
double predicted_top_mass(const LimitMeasure& limit, const FitnessDistribution& dist, double epsilon);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

/// Cross-replica mean and standard error of every snapshot quantity, in
/// replica-index order.
struct SnapshotAggregate {
  std::uint64_t n = 0;
  std::size_t replicas = 0;
  MeanStderr fbar;
  MeanStderr total_mass;
  MeanStderr top_window_mass;
  std::vector<MeanStderr> gamma;                 // per bin
  std::vector<MeanStderr> pk;                    // k = 1..K
  std::vector<std::vector<MeanStderr>> gamma_k;  // [k-1][bin]
};

SnapshotAggregate aggregate_snapshots(const std::vector<EmpiricalSnapshot>& snaps);

}  // namespace pafit
