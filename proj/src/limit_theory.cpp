#include "pafit/limit_theory.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pafit {

std::string_view to_string(Phase phase) {
  return phase == Phase::FitGetRicher ? "FitGetRicher" : "BoseEinstein";
}

double LimitMeasure::mass(const FitnessDistribution& dist, Window window, IntegrationOptions opts) const {
  double m = dist.integrate(density_factor, window, opts);
  if (extra_atom_at_one > 0.0 && window.lo < 1.0 && window.hi >= 1.0) m += extra_atom_at_one;
  return m;
}

double LimitMeasure::atom_at_one(const FitnessDistribution& dist) const {
  const double mu_one = dist.mass_at_one();
  return (mu_one > 0.0 ? mu_one * density_factor(1.0) : 0.0) + extra_atom_at_one;
}

Phase classify_phase(const FitnessDistribution& dist, double lambda) {
  if (!(lambda > 0.0)) throw ContractViolation("lambda must be positive");
  const double edge = dist.integrate(Integrand::f_over_one_minus());
  return edge >= lambda ? Phase::FitGetRicher : Phase::BoseEinstein;
}

double solve_theta_star(const FitnessDistribution& dist, double lambda, double tol) {
  if (!(tol > 0.0)) throw ContractViolation("tolerance must be positive");
  if (classify_phase(dist, lambda) == Phase::BoseEinstein) return 1.0;
  if (dist.integrate(Integrand::f_over_one_minus()) == lambda) return 1.0;

  auto excess = [&](double theta) { return dist.integrate(Integrand::f_over_theta_minus(theta)) - lambda; };

  double lo = 1.0;
  double hi = 2.0;
  int doublings = 0;
  while (excess(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1100) throw ThetaSolveError("no upper bracket for theta*", lo, hi, excess(hi), doublings);
  }

  int it = 0;
  double mid = 0.5 * (lo + hi);
  double r = excess(mid);
  bool collapsed = false;
  for (; it < 400 && !std::isnan(r); ++it) {
    if (std::fabs(r) <= tol) return mid;
    if (r > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      collapsed = true;
      break;
    }
    mid = 0.5 * (lo + hi);
    r = excess(mid);
  }
  // The bracket shrank to a few ulps with the sign change still inside: theta*
  // is pinned to double precision even though the residual (steep near
  // theta = 1) exceeds tol.
  if (collapsed) {
    const double r_lo = excess(lo), r_hi = excess(hi);
    if (r_lo >= 0.0 && r_hi <= 0.0) return std::fabs(r_lo) <= std::fabs(r_hi) ? lo : hi;
  }
  std::ostringstream msg;
  msg << "theta* bisection did not converge: bracket [" << lo << ", " << hi << "], residual " << r;
  throw ThetaSolveError(msg.str(), lo, hi, r, it);
}

double map_T(const FitnessDistribution& dist, double lambda, double theta) {
  if (!(lambda > 0.0)) throw ContractViolation("lambda must be positive");
  if (!(theta >= 1.0)) throw ContractViolation("map_T needs theta >= 1");
  if (theta == 1.0) return 1.0;
  return 1.0 + (theta - 1.0) / lambda * dist.integrate(Integrand::f_over_theta_minus(theta));
}

LimitMeasure limit_gamma(const FitnessDistribution& dist, double lambda) {
  return limit_gamma(dist, lambda, solve_theta_star(dist, lambda));
}

LimitMeasure limit_gamma(const FitnessDistribution& dist, double lambda, double theta_star) {
  if (classify_phase(dist, lambda) == Phase::FitGetRicher)
    return {Integrand::theta_over_theta_minus(theta_star), 0.0};
  return {Integrand::inv_one_minus(), condensate_mass(dist, lambda)};
}

LimitMeasure limit_gamma_k(double theta_star, std::uint64_t k) {
  const auto g = Integrand::gamma_k(theta_star, k);
  g.validate();
  return {g, 0.0};
}

double limit_pk(const FitnessDistribution& dist, double theta_star, std::uint64_t k) {
  return limit_gamma_k(theta_star, k).mass(dist);
}

double condensate_mass(const FitnessDistribution& dist, double lambda) {
  if (classify_phase(dist, lambda) == Phase::FitGetRicher) return 0.0;
  // Bose-Einstein phase forces mu({1}) = 0, so [0, 1) and [0, 1] agree.
  const double below_one = dist.integrate(Integrand::inv_one_minus());
  return std::max(0.0, 1.0 + lambda - below_one);
}

double PkSeries::total_mass() const {
  double s = 0.0;
  for (double p : pk) s += p;
  return s + tail_mass;
}

double PkSeries::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < pk.size(); ++i) s += static_cast<double>(i + 1) * pk[i];
  return s + tail_mean;
}

PkSeries pk_series(const FitnessDistribution& dist, double theta_star, double trunc_tol, std::uint64_t k_cap) {
  if (k_cap == 0) throw ContractViolation("k_cap must be >= 1");
  const Integrand worst = Integrand::yule_survival(theta_star, 1);
  std::uint64_t k_trunc = 1;
  while (k_trunc < k_cap) {
    Integrand s = worst;
    s.k = k_trunc;
    if (s(1.0) <= trunc_tol) break;
    ++k_trunc;
  }
  PkSeries out;
  out.pk.reserve(k_trunc);
  for (std::uint64_t k = 1; k <= k_trunc; ++k) out.pk.push_back(limit_pk(dist, theta_star, k));
  out.tail_mass = dist.integrate(Integrand::yule_survival(theta_star, k_trunc));
  out.tail_mean = dist.integrate(Integrand::yule_mean_tail(theta_star, k_trunc));
  return out;
}

LimitSummary summarize_limits(const FitnessDistribution& dist, double lambda, double tol) {
  const Phase phase = classify_phase(dist, lambda);
  const double theta = solve_theta_star(dist, lambda, tol);
  return LimitSummary{dist, lambda, phase, theta, limit_gamma(dist, lambda, theta), condensate_mass(dist, lambda)};
}

}  // namespace pafit
