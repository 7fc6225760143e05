#include "pafit/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pafit/output.hpp"

namespace pafit {

namespace {

void require_same_binning(const SnapshotAggregate& agg, const TheoryTables& theory) {
  if (agg.gamma.size() != theory.bins || agg.pk.size() != theory.max_k)
    throw std::invalid_argument("run and theory disagree on bins or K");
}

}  // namespace

TheoryTables theory_tables(const FitnessDistribution& dist, double lambda, const SnapshotOptions& opts) {
  const LimitSummary s = summarize_limits(dist, lambda);
  TheoryTables t;
  t.lambda = lambda;
  t.fitness = dist.describe();
  t.phase = s.phase;
  t.theta_star = s.theta_star;
  t.condensate_mass = s.condensate_mass;
  t.gamma_total = s.gamma.mass(dist);
  t.mean_fitness = dist.integrate(Integrand::identity());
  t.bins = opts.bins;
  t.max_k = opts.max_k;
  t.epsilon = opts.epsilon;
  const Binning binning(opts.bins);
  t.gamma_bins = predict_binned(s.gamma, dist, binning).mass;
  for (std::size_t k = 1; k <= opts.max_k; ++k) {
    t.gamma_k_bins.push_back(predict_binned(s.gamma_k(k), dist, binning).mass);
    t.pk.push_back(s.pk(k));
  }
  t.top_window_mass = predicted_top_mass(s.gamma, dist, opts.epsilon);
  t.mu_only_top_window_mass =
      dist.integrate(s.gamma.density_factor, Window{std::nextafter(1.0 - opts.epsilon, -1.0), 1.0});
  return t;
}

std::string format_check(const Check& c) {
  std::ostringstream os;
  os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": measured " << format_double(c.measured) << ", expected "
     << format_double(c.expected) << ", tolerance " << format_double(c.tolerance);
  if (!c.detail.empty()) os << " (" << c.detail << ")";
  return os.str();
}

Check check_fbar_relative(const SnapshotAggregate& agg, double theta_star, double rel) {
  Check c{"fbar_vs_theta_star", false, agg.fbar.mean, theta_star, rel, ""};
  const double err = std::fabs(agg.fbar.mean - theta_star) / theta_star;
  c.pass = err <= rel;
  c.detail = "relative error " + format_double(err) + " at n=" + std::to_string(agg.n);
  return c;
}

Check check_fbar_range(const SnapshotAggregate& agg, double lo, double hi) {
  Check c{"fbar_in_range", false, agg.fbar.mean, 0.5 * (lo + hi), 0.5 * (hi - lo), ""};
  c.pass = agg.fbar.mean >= lo && agg.fbar.mean <= hi;
  c.detail = "range [" + format_double(lo) + ", " + format_double(hi) + "] at n=" + std::to_string(agg.n);
  return c;
}

Check check_fbar_decreasing(const std::vector<SnapshotAggregate>& tail) {
  Check c{"fbar_decreasing", !tail.empty(), 0.0, 0.0, 0.0, "means"};
  double largest_rise = -kInfinity;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    c.detail += " n=" + std::to_string(tail[i].n) + ":" + format_double(tail[i].fbar.mean);
    if (i > 0) {
      const double rise = tail[i].fbar.mean - tail[i - 1].fbar.mean;
      largest_rise = std::max(largest_rise, rise);
      if (!(rise < 0.0)) c.pass = false;
    }
  }
  if (tail.size() < 2) c.pass = false;
  c.measured = tail.size() < 2 ? 0.0 : largest_rise;
  return c;
}

Check check_fbar_corridor(const SnapshotAggregate& agg, const TheoryTables& theory, double slack) {
  const double lo = theory.mean_fitness / theory.lambda - slack;
  const double hi = (1.0 + theory.lambda) / theory.lambda + slack;
  Check c = check_fbar_range(agg, lo, hi);
  c.name = "fbar_a_priori_corridor";
  return c;
}

Check check_gamma_bins(const SnapshotAggregate& agg, const TheoryTables& theory, double tol) {
  require_same_binning(agg, theory);
  Check c{"gamma_max_bin_error", false, 0.0, 0.0, tol * (1.0 + theory.lambda), ""};
  std::size_t worst = 0;
  for (std::size_t b = 0; b < theory.bins; ++b) {
    const double e = std::fabs(agg.gamma[b].mean - theory.gamma_bins[b]);
    if (e > c.measured) {
      c.measured = e;
      worst = b;
    }
  }
  c.pass = c.measured <= c.tolerance;
  c.detail = "worst bin " + std::to_string(worst) + " of " + std::to_string(theory.bins);
  return c;
}

Check check_total_mass(const SnapshotAggregate& agg, double lambda, double stderrs) {
  Check c{"gamma_total_mass", false, agg.total_mass.mean, 1.0 + lambda, stderrs * agg.total_mass.stderr_, ""};
  c.pass = std::fabs(agg.total_mass.mean - c.expected) <= c.tolerance;
  c.detail = "stderr " + format_double(agg.total_mass.stderr_);
  return c;
}

Check check_condensate(const SnapshotAggregate& agg, const TheoryTables& theory, double abs_tol) {
  Check c{"top_window_mass", false, agg.top_window_mass.mean, theory.top_window_mass, abs_tol, ""};
  c.pass = std::fabs(c.measured - c.expected) <= abs_tol;
  c.detail = "window [" + format_double(1.0 - theory.epsilon) + ", 1]";
  return c;
}

Check check_condensate_signature(const SnapshotAggregate& agg, const TheoryTables& theory, double factor) {
  Check c{"top_window_excess", false, agg.top_window_mass.mean, factor * theory.mu_only_top_window_mass, 0.0, ""};
  c.pass = c.measured > c.expected;
  c.detail = "must exceed " + format_double(factor) + " x density-only mass " +
             format_double(theory.mu_only_top_window_mass);
  return c;
}

Check check_pk(const SnapshotAggregate& agg, const TheoryTables& theory, std::size_t k_max, double tol) {
  require_same_binning(agg, theory);
  if (k_max > theory.max_k) throw std::invalid_argument("k_max exceeds the tracked impacts");
  Check c{"pk_max_error", false, 0.0, 0.0, tol, ""};
  std::size_t worst = 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double e = std::fabs(agg.pk[k - 1].mean - theory.pk[k - 1]);
    if (e > c.measured) {
      c.measured = e;
      worst = k;
    }
  }
  c.pass = c.measured <= tol;
  c.detail = "k=1.." + std::to_string(k_max) + ", worst k=" + std::to_string(worst);
  return c;
}

Check check_gamma_k(const SnapshotAggregate& agg, const TheoryTables& theory, std::size_t k, double tol) {
  require_same_binning(agg, theory);
  if (k < 1 || k > theory.max_k) throw std::invalid_argument("k outside the tracked impacts");
  Check c{"gamma_k" + std::to_string(k) + "_l1", false, 0.0, 0.0, tol, ""};
  for (std::size_t b = 0; b < theory.bins; ++b)
    c.measured += std::fabs(agg.gamma_k[k - 1][b].mean - theory.gamma_k_bins[k - 1][b]);
  c.pass = c.measured <= tol;
  return c;
}

std::vector<Check> evaluate_run(const std::vector<SnapshotAggregate>& trajectory, const TheoryTables& theory,
                                const Tolerances& tol) {
  if (trajectory.empty()) throw std::invalid_argument("run has no checkpoints");
  const SnapshotAggregate& last = trajectory.back();
  std::vector<Check> out;
  out.push_back(check_fbar_corridor(last, theory, tol.corridor_slack));
  if (theory.phase == Phase::FitGetRicher) {
    out.push_back(check_fbar_relative(last, theory.theta_star, tol.fbar_relative));
    out.push_back(check_gamma_bins(last, theory, tol.gamma_bin));
  } else {
    out.push_back(check_fbar_range(last, tol.fbar_be_lo, tol.fbar_be_hi));
    const std::size_t from = trajectory.size() >= 3 ? trajectory.size() - 3 : 0;
    out.push_back(check_fbar_decreasing({trajectory.begin() + static_cast<std::ptrdiff_t>(from), trajectory.end()}));
    out.push_back(check_condensate(last, theory, tol.condensate_abs));
    out.push_back(check_condensate_signature(last, theory, tol.condensate_factor));
  }
  out.push_back(check_total_mass(last, theory.lambda, tol.mass_stderrs));
  out.push_back(check_pk(last, theory, std::min(tol.pk_k_max, theory.max_k), tol.pk_abs));
  for (std::size_t k = 1; k <= std::min(tol.gamma_k_max, theory.max_k); ++k)
    out.push_back(check_gamma_k(last, theory, k, tol.gamma_k_l1));
  return out;
}

}  // namespace pafit
