#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pafit/empirics.hpp"
#include "pafit/limit_theory.hpp"

namespace pafit {

/// Limit predictions binned exactly like the snapshots of a run.
struct TheoryTables {
  double lambda = 0.0;
  std::string fitness;
  Phase phase = Phase::FitGetRicher;
  double theta_star = 1.0;
  double condensate_mass = 0.0;
  double gamma_total = 0.0;
  double mean_fitness = 0.0;  // int f dmu
  std::size_t bins = 0;
  std::size_t max_k = 0;
  double epsilon = 0.0;
  std::vector<double> gamma_bins;                 // Gamma((b/B, (b+1)/B]), atom in the last bin
  std::vector<std::vector<double>> gamma_k_bins;  // [k-1][bin]
  std::vector<double> pk;                         // k = 1..K
  double top_window_mass = 0.0;                   // Gamma([1 - eps, 1])
  double mu_only_top_window_mass = 0.0;           // same window, density part only
};

TheoryTables theory_tables(const FitnessDistribution& dist, double lambda, const SnapshotOptions& opts);

struct Check {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

std::string format_check(const Check& c);

struct Tolerances {
  double fbar_relative = 0.02;
  double fbar_be_lo = 1.0;
  double fbar_be_hi = 1.10;
  double corridor_slack = 0.05;
  double gamma_bin = 0.05;  // times (1 + lambda)
  double mass_stderrs = 3.0;
  double condensate_abs = 0.1;
  double condensate_factor = 10.0;
  double pk_abs = 0.01;
  std::size_t pk_k_max = 5;
  double gamma_k_l1 = 0.05;
  std::size_t gamma_k_max = 2;
};

Check check_fbar_relative(const SnapshotAggregate& agg, double theta_star, double rel);
Check check_fbar_range(const SnapshotAggregate& agg, double lo, double hi);
/// Strictly decreasing mean F-bar along the given checkpoints.
Check check_fbar_decreasing(const std::vector<SnapshotAggregate>& tail);
/// [int f dmu / lambda - slack, (1 + lambda) / lambda + slack].
Check check_fbar_corridor(const SnapshotAggregate& agg, const TheoryTables& theory, double slack);
/// max_b |mean Gamma_n(b) - Gamma(b)| <= tol (1 + lambda).
Check check_gamma_bins(const SnapshotAggregate& agg, const TheoryTables& theory, double tol);
/// |mean total mass - (1 + lambda)| <= stderrs * stderr.
Check check_total_mass(const SnapshotAggregate& agg, double lambda, double stderrs);
Check check_condensate(const SnapshotAggregate& agg, const TheoryTables& theory, double abs_tol);
Check check_condensate_signature(const SnapshotAggregate& agg, const TheoryTables& theory, double factor);
/// max_{k <= k_max} |mean p_n(k) - p(k)| <= tol.
Check check_pk(const SnapshotAggregate& agg, const TheoryTables& theory, std::size_t k_max, double tol);
/// L1 distance between binned Gamma_n^(k) and Gamma^(k).
Check check_gamma_k(const SnapshotAggregate& agg, const TheoryTables& theory, std::size_t k, double tol);

/// Checks appropriate to the phase, evaluated on the final checkpoint (and
/// the last three checkpoints for the Bose-Einstein trend).
std::vector<Check> evaluate_run(const std::vector<SnapshotAggregate>& trajectory, const TheoryTables& theory,
                                const Tolerances& tol = {});

}  // namespace pafit
