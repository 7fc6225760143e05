#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pafit/random.hpp"

namespace pafit {

/// Raised when a caller breaks a documented precondition (non-catalog
/// integrand, Dirac measure, negative increment, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct DiscretePoint {
  double value;
  double mass;
};

struct Discrete {
  std::vector<DiscretePoint> points;
};

/// Piecewise polynomial density. Piece j lives on (edges[j], edges[j+1]] and
/// has density sum_m coeffs[j][m] * f^m (ascending powers of f itself, not of
/// a piece-local coordinate). An empty coefficient list is the zero density.
struct PiecewiseDensity {
  std::vector<double> edges;
  std::vector<std::vector<double>> coeffs;
};

/// Beta(alpha, beta) law stretched onto [0, upper].
struct BetaShape {
  double alpha;
  double beta;
  double upper = 1.0;
};

/// Uniform law on [0, upper].
struct Uniform {
  double upper = 1.0;
};

using Representation = std::variant<Discrete, PiecewiseDensity, BetaShape, Uniform>;

/// A fitness law before rescaling: mu = (1 - top_atom) * rep + top_atom * delta_s,
/// where s is the essential supremum of rep.
struct RawDistribution {
  Representation rep;
  double top_atom = 0.0;
};

/// Essential supremum of a raw law. Throws ContractViolation if the law has no
/// positive mass.
double ess_sup(const RawDistribution& raw);

/// Catalog of functions that can be integrated against a fitness distribution.
enum class IntegrandKind {
  One,                  // 1 (indicator when combined with a Window)
  Identity,             // f
  InvOneMinus,          // 1 / (1 - f)
  FOverOneMinus,        // f / (1 - f)
  FOverThetaMinus,      // f / (theta - f)
  ThetaOverThetaMinus,  // theta / (theta - f)
  GammaK,               // (1/(k + theta/f)) (theta/f) prod_{i<k} i/(i + theta/f)
  YuleSurvival,         // P(Y > k) for Y ~ Yule-Simon(theta/f)
  YuleMeanTail,         // E[Y; Y > k] for Y ~ Yule-Simon(theta/f)
};

struct Integrand {
  IntegrandKind kind = IntegrandKind::One;
  double theta = 1.0;
  std::uint64_t k = 1;

  static Integrand one() { return {IntegrandKind::One}; }
  static Integrand identity() { return {IntegrandKind::Identity}; }
  static Integrand inv_one_minus() { return {IntegrandKind::InvOneMinus}; }
  static Integrand f_over_one_minus() { return {IntegrandKind::FOverOneMinus}; }
  static Integrand f_over_theta_minus(double theta) {
    return {IntegrandKind::FOverThetaMinus, theta};
  }
  static Integrand theta_over_theta_minus(double theta) {
    return {IntegrandKind::ThetaOverThetaMinus, theta};
  }
  static Integrand gamma_k(double theta, std::uint64_t k) {
    return {IntegrandKind::GammaK, theta, k};
  }
  static Integrand yule_survival(double theta, std::uint64_t k) {
    return {IntegrandKind::YuleSurvival, theta, k};
  }
  static Integrand yule_mean_tail(double theta, std::uint64_t k) {
    return {IntegrandKind::YuleMeanTail, theta, k};
  }

  /// Pointwise value; +inf at a pole. Throws ContractViolation for invalid
  /// parameters (theta < 1, k = 0 for GammaK, unknown kind).
  double operator()(double f) const;

  /// True when the integrand has a non-integrable pole at f = 1.
  bool pole_at_one() const;

  void validate() const;
};

/// Integration window (lo, hi]. The default covers the whole support.
struct Window {
  double lo = 0.0;
  double hi = 1.0;
};

enum class IntegrationMethod { Auto, Exact, Quadrature };

struct IntegrationOptions {
  double abs_tol = 1e-10;
  IntegrationMethod method = IntegrationMethod::Auto;
};

/// A probability measure mu on (0, 1] with ess sup(mu) = 1 and not a Dirac
/// mass: mu = (1 - atom_at_one) * rep + atom_at_one * delta_1.
///
/// Immutable after construction, so it can be shared freely across threads.
class FitnessDistribution {
 public:
  /// Validates the raw law and requires ess sup = 1 exactly. Masses are
  /// accepted within 1e-9 of one and then renormalised exactly.
  explicit FitnessDistribution(RawDistribution raw);

  static FitnessDistribution uniform() { return FitnessDistribution({Uniform{}}); }
  static FitnessDistribution discrete(std::vector<DiscretePoint> points, double atom_at_one = 0.0);
  static FitnessDistribution density(std::vector<double> edges,
                                     std::vector<std::vector<double>> coeffs,
                                     double atom_at_one = 0.0);
  static FitnessDistribution beta(double alpha, double beta, double atom_at_one = 0.0);

  const Representation& representation() const { return rep_; }
  double atom_at_one() const { return atom_; }
  /// mu({1}): explicit atom plus any discrete point sitting at 1.
  double mass_at_one() const;
  /// True when (1/(1-f)) is not mu-integrable near 1.
  bool diverges_at_one() const;

  RawDistribution raw() const { return {rep_, atom_}; }

  /// Inverse CDF at v in (0, 1), atom at one included.
  double quantile(double v) const;

  /// One draw; consumes exactly one uniform from the stream.
  double sample(RandomStream& rng) const { return quantile(rng.uniform()); }

  /// Integral of the integrand over the window against mu; +inf when it
  /// diverges.
  double integrate(const Integrand& g, Window window = {}, IntegrationOptions opts = {}) const;

  std::string describe() const;

 private:
  double integrate_rep(const Integrand& g, Window w, const IntegrationOptions& opts) const;

  Representation rep_;
  double atom_ = 0.0;
  std::vector<double> cumulative_;  // discrete points or density pieces
  double beta_norm_ = 1.0;          // B(alpha, beta) for BetaShape
};

/// Push raw forward under f -> f / s, s = ess sup(raw).
FitnessDistribution normalize_esssup(const RawDistribution& raw);

inline double sample(const FitnessDistribution& dist, RandomStream& rng) { return dist.sample(rng); }

inline double integrate(const FitnessDistribution& dist, const Integrand& g, Window window = {},
                        IntegrationOptions opts = {}) {
  return dist.integrate(g, window, opts);
}

}  // namespace pafit
