#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "pafit/measures.hpp"

namespace pafit {

enum class Phase { FitGetRicher, BoseEinstein };

std::string_view to_string(Phase phase);

/// Measure of the form factor(f) mu(df) + extra_atom * delta_1.
struct LimitMeasure {
  Integrand density_factor;
  double extra_atom_at_one = 0.0;

  double factor(double f) const { return density_factor(f); }
  /// Mass of the window (lo, hi].
  double mass(const FitnessDistribution& dist, Window window = {}, IntegrationOptions opts = {}) const;
  /// Total mass sitting exactly at f = 1 (mu's own atom reweighted plus the extra atom).
  double atom_at_one(const FitnessDistribution& dist) const;
};

/// Bisection failed to pin the root; carries the final bracket.
class ThetaSolveError : public std::runtime_error {
 public:
  ThetaSolveError(const std::string& what, double lo, double hi, double residual, int iterations)
      : std::runtime_error(what), lo(lo), hi(hi), residual(residual), iterations(iterations) {}
  double lo, hi, residual;
  int iterations;
};

/// FitGetRicher iff int f/(1-f) dmu >= lambda (an infinite integral included).
Phase classify_phase(const FitnessDistribution& dist, double lambda);

/// Root theta* > 1 of int f/(theta - f) dmu = lambda in the fit-get-richer
/// phase (1 on the phase boundary), exactly 1 in the Bose-Einstein phase.
/// Bisection on (1, hi], hi doubled from 2 until the integral drops below
/// lambda.
double solve_theta_star(const FitnessDistribution& dist, double lambda, double tol = 1e-12);

/// T(theta) = 1 + (1/lambda) int (theta - 1)/(theta - f) f dmu.
double map_T(const FitnessDistribution& dist, double lambda, double theta);

/// Limit of the impact distributions Gamma_n. Total mass 1 + lambda.
LimitMeasure limit_gamma(const FitnessDistribution& dist, double lambda);
LimitMeasure limit_gamma(const FitnessDistribution& dist, double lambda, double theta_star);

/// Limit of the impact-k measures Gamma_n^(k) for a given theta*.
LimitMeasure limit_gamma_k(double theta_star, std::uint64_t k);

/// lim p_n(k) = Gamma^(k)((0, 1]).
double limit_pk(const FitnessDistribution& dist, double theta_star, std::uint64_t k);

/// Atom of Gamma at 1: zero in the fit-get-richer phase.
double condensate_mass(const FitnessDistribution& dist, double lambda);

/// p(1..K) plus the exact remainder beyond K, taken from the Yule-Simon
/// survival function integrated against mu.
struct PkSeries {
  std::vector<double> pk;  // pk[k-1] = lim p_n(k)
  double tail_mass = 0.0;  // sum_{k > K} p(k)
  double tail_mean = 0.0;  // sum_{k > K} k p(k)

  std::uint64_t truncation() const { return pk.size(); }
  double total_mass() const;
  double mean() const;
};

/// K is the smallest index whose worst-case (f = 1) Yule-Simon survival is
/// below trunc_tol, capped at k_cap.
PkSeries pk_series(const FitnessDistribution& dist, double theta_star, double trunc_tol = 1e-4,
                   std::uint64_t k_cap = 200);

struct LimitSummary {
  FitnessDistribution dist;
  double lambda;
  Phase phase;
  double theta_star;
  LimitMeasure gamma;
  double condensate_mass;

  LimitMeasure gamma_k(std::uint64_t k) const { return limit_gamma_k(theta_star, k); }
  double pk(std::uint64_t k) const { return limit_pk(dist, theta_star, k); }
};

LimitSummary summarize_limits(const FitnessDistribution& dist, double lambda, double tol = 1e-12);

}  // namespace pafit
