#include "pafit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "polynomial.hpp"

namespace pafit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kMassTolerance = 1e-9;

bool is_zero_poly(const std::vector<double>& c) {
  return std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
}

// Value of the integrand given f and 1 - f, the latter supplied separately so
// that the f = 1 - e^{-t} substitution keeps full precision near the pole.
double integrand_at(const Integrand& g, double f, double omf) {
  switch (g.kind) {
    case IntegrandKind::One:
      return 1.0;
    case IntegrandKind::Identity:
      return f;
    case IntegrandKind::InvOneMinus:
      return omf > 0.0 ? 1.0 / omf : kInfinity;
    case IntegrandKind::FOverOneMinus:
      return omf > 0.0 ? f / omf : kInfinity;
    case IntegrandKind::FOverThetaMinus: {
      const double gap = (g.theta - 1.0) + omf;
      return gap > 0.0 ? f / gap : kInfinity;
    }
    case IntegrandKind::ThetaOverThetaMinus: {
      const double gap = (g.theta - 1.0) + omf;
      return gap > 0.0 ? g.theta / gap : kInfinity;
    }
    case IntegrandKind::GammaK: {
      if (f <= 0.0) return g.k == 1 ? 1.0 : 0.0;
      const double rho = g.theta / f;
      double value = rho / (static_cast<double>(g.k) + rho);
      for (std::uint64_t i = 1; i < g.k && value > 0.0; ++i) {
        const double di = static_cast<double>(i);
        value *= di / (di + rho);
      }
      return value;
    }
    case IntegrandKind::YuleSurvival: {
      if (g.k == 0) return 1.0;
      if (f <= 0.0) return 0.0;
      const double rho = g.theta / f;
      const double k = static_cast<double>(g.k);
      return std::exp(std::lgamma(k + 1.0) + std::lgamma(rho + 1.0) - std::lgamma(k + rho + 1.0));
    }
    case IntegrandKind::YuleMeanTail: {
      if (f <= 0.0) return 0.0;
      const double rho = g.theta / f;
      // rho - 1 = (theta - f) / f
      const double excess = ((g.theta - 1.0) + omf) / f;
      if (excess <= 0.0) return kInfinity;
      const double k = static_cast<double>(g.k);
      const double survival =
          std::exp(std::lgamma(k + 1.0) + std::lgamma(rho + 1.0) - std::lgamma(k + rho + 1.0));
      return survival * rho * (k + 1.0) / excess;
    }
  }
  throw ContractViolation("integrand outside the catalog");
}

// Adaptive Gauss-Kronrod (15 points) on [a, b] with exponential substitutions at
// the endpoints 0 (f = e^{-t}) and 1 (f = 1 - e^{-t}). h(f, 1 - f) is the
// integrand times the density.
template <class H>
double quad(const H& h, double a, double b, double abs_tol) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto run = [&](auto&& fn, double lo, double hi) {
    double l1 = 0.0;
    double err = 0.0;
    GK::integrate(fn, lo, hi, 0, 1.0, &err, &l1);
    const double rel = std::clamp(abs_tol / std::max(l1, 1e-300), 1e-15, 1e-3);
    return GK::integrate(fn, lo, hi, 30, rel, &err, &l1);
  };
  auto plain = [&](double lo, double hi) {
    return run([&](double f) { return h(f, 1.0 - f); }, lo, hi);
  };
  auto from_zero = [&](double hi) {
    // f = e^{-t}, t in [-ln hi, inf)
    auto fn = [&](double t) {
      const double f = std::exp(-t);
      if (f == 0.0) return 0.0;
      return h(f, -std::expm1(-t)) * f;
    };
    return run(fn, -std::log(hi), std::numeric_limits<double>::infinity());
  };
  auto to_one = [&](double lo) {
    // f = 1 - e^{-t}, t in [-ln(1 - lo), inf)
    auto fn = [&](double t) {
      const double omf = std::exp(-t);
      if (omf == 0.0) return 0.0;
      return h(-std::expm1(-t), omf) * omf;
    };
    return run(fn, -std::log1p(-lo), std::numeric_limits<double>::infinity());
  };

  if (!(b > a)) return 0.0;
  const bool at_zero = a <= 0.0;
  const bool at_one = b >= 1.0;
  if (at_zero && at_one) return from_zero(0.5) + to_one(0.5);
  if (at_zero) return from_zero(b);
  if (at_one) return to_one(a);
  return plain(a, b);
}

// Integral of r(f) / (theta - f) over [a, b] with theta >= 1 >= b.
long double rational_integral(const detail::Poly& r, double theta, double a, double b) {
  if (theta >= 2.0) {
    // f/theta <= 1/2: geometric series sum_m theta^{-(m+1)} int r(f) f^m df
    long double sum = 0.0L;
    long double inv = 1.0L / theta;
    long double scale = inv;
    detail::Poly shifted = r;
    for (int m = 0; m < 200; ++m) {
      const long double term = scale * detail::definite(shifted, a, b);
      sum += term;
      if (m > 4 && std::fabs(term) <= 1e-21L * (std::fabs(sum) + 1e-300L)) break;
      shifted = detail::times_f(shifted);
      scale *= inv;
    }
    return sum;
  }
  detail::Poly q;
  long double residue = detail::divide_linear(r, theta, q);
  long double log_term = 0.0L;
  if (b >= theta) {
    if (!detail::negligible_at(r, theta)) return kInfinity;
    residue = 0.0L;
  }
  if (residue != 0.0L) {
    log_term = residue * std::log1p(static_cast<long double>(b - a) / (theta - static_cast<long double>(b)));
  }
  return log_term - detail::definite(q, a, b);
}

bool window_has_one(const Window& w) { return w.lo < 1.0 && w.hi >= 1.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Integrand

void Integrand::validate() const {
  switch (kind) {
    case IntegrandKind::One:
    case IntegrandKind::Identity:
    case IntegrandKind::InvOneMinus:
    case IntegrandKind::FOverOneMinus:
      return;
    case IntegrandKind::FOverThetaMinus:
    case IntegrandKind::ThetaOverThetaMinus:
      if (!(theta >= 1.0) || !std::isfinite(theta)) throw ContractViolation("theta must be >= 1");
      return;
    case IntegrandKind::GammaK:
      if (k == 0) throw ContractViolation("gamma_k requires k >= 1");
      [[fallthrough]];
    case IntegrandKind::YuleSurvival:
    case IntegrandKind::YuleMeanTail:
      if (!(theta >= 1.0) || !std::isfinite(theta)) throw ContractViolation("theta must be >= 1");
      return;
  }
  throw ContractViolation("integrand outside the catalog");
}

double Integrand::operator()(double f) const {
  validate();
  return integrand_at(*this, f, 1.0 - f);
}

bool Integrand::pole_at_one() const {
  switch (kind) {
    case IntegrandKind::InvOneMinus:
    case IntegrandKind::FOverOneMinus:
      return true;
    case IntegrandKind::FOverThetaMinus:
    case IntegrandKind::ThetaOverThetaMinus:
    case IntegrandKind::YuleMeanTail:
      return theta == 1.0;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// Raw laws

double ess_sup(const RawDistribution& raw) {
  const double s = std::visit(
      overloaded{
          [](const Discrete& d) {
            double top = 0.0;
            for (const auto& p : d.points)
              if (p.mass > 0.0) top = std::max(top, p.value);
            return top;
          },
          [](const PiecewiseDensity& d) {
            for (std::size_t j = d.coeffs.size(); j-- > 0;)
              if (!is_zero_poly(d.coeffs[j])) return d.edges.at(j + 1);
            return 0.0;
          },
          [](const BetaShape& b) { return b.upper; },
          [](const Uniform& u) { return u.upper; },
      },
      raw.rep);
  if (!(s > 0.0) || !std::isfinite(s)) throw ContractViolation("fitness law needs a finite, positive ess sup");
  return s;
}

FitnessDistribution normalize_esssup(const RawDistribution& raw) {
  const double s = ess_sup(raw);
  RawDistribution out{raw.rep, raw.top_atom};
  std::visit(overloaded{
                 [&](Discrete& d) {
                   for (auto& p : d.points) {
                     if (p.mass > 0.0 && !(p.value > 0.0 && p.value <= s))
                       throw ContractViolation("discrete point outside (0, s]");
                     p.value = p.value == s ? 1.0 : p.value / s;
                   }
                 },
                 [&](PiecewiseDensity& d) {
                   if (d.edges.empty() || d.edges.front() < 0.0) throw ContractViolation("density edges must start at >= 0");
                   // drop trailing zero pieces above s
                   while (d.edges.size() > 1 && d.edges[d.edges.size() - 2] >= s) {
                     d.edges.pop_back();
                     d.coeffs.pop_back();
                   }
                   for (auto& e : d.edges) e = e == s ? 1.0 : e / s;
                   // density of f/s at g is s * rho(s g): c_m -> c_m s^{m+1}
                   for (auto& c : d.coeffs) {
                     double scale = s;
                     for (auto& x : c) {
                       x *= scale;
                       scale *= s;
                     }
                   }
                 },
                 [](BetaShape& b) { b.upper = 1.0; },
                 [](Uniform& u) { u.upper = 1.0; },
             },
             out.rep);
  return FitnessDistribution(std::move(out));
}

// ---------------------------------------------------------------------------
// FitnessDistribution

FitnessDistribution::FitnessDistribution(RawDistribution raw) : rep_(std::move(raw.rep)), atom_(raw.top_atom) {
  if (!(atom_ >= 0.0 && atom_ < 1.0)) throw ContractViolation("atom_at_one must lie in [0, 1)");

  std::visit(
      overloaded{
          [&](Discrete& d) {
            std::vector<DiscretePoint> pts;
            for (const auto& p : d.points) {
              if (!(p.mass >= 0.0) || !std::isfinite(p.mass)) throw ContractViolation("negative or non-finite mass");
              if (p.mass == 0.0) continue;
              if (!(p.value > 0.0 && p.value <= 1.0)) throw ContractViolation("discrete point outside (0, 1]");
              pts.push_back(p);
            }
            std::sort(pts.begin(), pts.end(), [](auto& l, auto& r) { return l.value < r.value; });
            std::vector<DiscretePoint> merged;
            for (const auto& p : pts) {
              if (!merged.empty() && merged.back().value == p.value)
                merged.back().mass += p.mass;
              else
                merged.push_back(p);
            }
            const double total = std::accumulate(merged.begin(), merged.end(), 0.0,
                                                 [](double acc, const DiscretePoint& p) { return acc + p.mass; });
            if (std::fabs(total - 1.0) > kMassTolerance) throw ContractViolation("discrete masses must sum to 1");
            double running = 0.0;
            for (auto& p : merged) {
              p.mass /= total;
              running += p.mass;
              cumulative_.push_back(running);
            }
            cumulative_.back() = 1.0;
            if (merged.back().value != 1.0) throw ContractViolation("ess sup must equal 1");
            const bool has_extra_point = atom_ > 0.0 && merged.back().value != 1.0;
            if (merged.size() + (has_extra_point ? 1 : 0) < 2) throw ContractViolation("Dirac fitness law");
            d.points = std::move(merged);
          },
          [&](PiecewiseDensity& d) {
            if (d.edges.size() < 2 || d.coeffs.size() + 1 != d.edges.size())
              throw ContractViolation("density needs edges.size() == coeffs.size() + 1 >= 2");
            if (d.edges.front() < 0.0) throw ContractViolation("density edges must lie in [0, 1]");
            for (std::size_t j = 0; j + 1 < d.edges.size(); ++j)
              if (!(d.edges[j] < d.edges[j + 1])) throw ContractViolation("density edges must increase");
            if (d.edges.back() != 1.0) throw ContractViolation("ess sup must equal 1");
            if (is_zero_poly(d.coeffs.back())) throw ContractViolation("ess sup must equal 1");
            double total = 0.0;
            std::vector<double> masses;
            for (std::size_t j = 0; j < d.coeffs.size(); ++j) {
              const auto p = detail::to_poly(d.coeffs[j]);
              const double lo = d.edges[j], hi = d.edges[j + 1];
              const long double scale = detail::abs_sum(p) + 1e-300L;
              for (int i = 0; i <= 64; ++i) {
                const long double x = lo + (hi - lo) * i / 64.0L;
                if (detail::eval(p, x) < -1e-12L * scale) throw ContractViolation("density must be nonnegative");
              }
              masses.push_back(static_cast<double>(detail::definite(p, lo, hi)));
              total += masses.back();
            }
            if (std::fabs(total - 1.0) > kMassTolerance) throw ContractViolation("density must integrate to 1");
            double running = 0.0;
            for (std::size_t j = 0; j < d.coeffs.size(); ++j) {
              for (auto& c : d.coeffs[j]) c /= total;
              running += masses[j] / total;
              cumulative_.push_back(running);
            }
            cumulative_.back() = 1.0;
          },
          [&](BetaShape& b) {
            if (!(b.alpha > 0.0 && b.beta > 0.0) || !std::isfinite(b.alpha) || !std::isfinite(b.beta))
              throw ContractViolation("beta shape parameters must be positive");
            if (b.upper != 1.0) throw ContractViolation("ess sup must equal 1");
            beta_norm_ = boost::math::beta(b.alpha, b.beta);
          },
          [&](Uniform& u) {
            if (u.upper != 1.0) throw ContractViolation("ess sup must equal 1");
          },
      },
      rep_);
}

FitnessDistribution FitnessDistribution::discrete(std::vector<DiscretePoint> points, double atom_at_one) {
  return FitnessDistribution({Discrete{std::move(points)}, atom_at_one});
}

FitnessDistribution FitnessDistribution::density(std::vector<double> edges, std::vector<std::vector<double>> coeffs,
                                                 double atom_at_one) {
  return FitnessDistribution({PiecewiseDensity{std::move(edges), std::move(coeffs)}, atom_at_one});
}

FitnessDistribution FitnessDistribution::beta(double alpha, double beta, double atom_at_one) {
  return FitnessDistribution({BetaShape{alpha, beta}, atom_at_one});
}

double FitnessDistribution::mass_at_one() const {
  double m = atom_;
  if (const auto* d = std::get_if<Discrete>(&rep_)) {
    if (d->points.back().value == 1.0) m += (1.0 - atom_) * d->points.back().mass;
  }
  return m;
}

bool FitnessDistribution::diverges_at_one() const {
  if (mass_at_one() > 0.0) return true;
  return std::visit(overloaded{
                        [](const Discrete&) { return false; },
                        [](const PiecewiseDensity& d) {
                          return !detail::negligible_at(detail::to_poly(d.coeffs.back()), 1.0L);
                        },
                        [](const BetaShape& b) { return b.beta <= 1.0; },
                        [](const Uniform&) { return true; },
                    },
                    rep_);
}

double FitnessDistribution::quantile(double v) const {
  if (atom_ > 0.0) {
    if (v > 1.0 - atom_) return 1.0;
    v /= (1.0 - atom_);
  }
  const double x = std::visit(
      overloaded{
          [&](const Discrete& d) {
            // smallest point with F(x) >= v
            const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), v);
            const auto idx = std::min<std::size_t>(it - cumulative_.begin(), d.points.size() - 1);
            return d.points[idx].value;
          },
          [&](const PiecewiseDensity& d) {
            const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), v);
            const auto j = std::min<std::size_t>(it - cumulative_.begin(), d.coeffs.size() - 1);
            const double before = j == 0 ? 0.0 : cumulative_[j - 1];
            const auto p = detail::to_poly(d.coeffs[j]);
            const long double target = v - before;
            long double lo = d.edges[j], hi = d.edges[j + 1];
            const long double base = detail::primitive(p, lo);
            for (int it2 = 0; it2 < 80 && hi - lo > 0.0L; ++it2) {
              const long double mid = 0.5L * (lo + hi);
              if (detail::primitive(p, mid) - base < target)
                lo = mid;
              else
                hi = mid;
            }
            return static_cast<double>(0.5L * (lo + hi));
          },
          [&](const BetaShape& b) { return boost::math::ibeta_inv(b.alpha, b.beta, v); },
          [&](const Uniform&) { return v; },
      },
      rep_);
  return std::clamp(x, std::numeric_limits<double>::min(), 1.0);
}

double FitnessDistribution::integrate(const Integrand& g, Window window, IntegrationOptions opts) const {
  g.validate();
  window.lo = std::max(window.lo, 0.0);
  window.hi = std::min(window.hi, 1.0);
  if (!(window.hi > window.lo)) return 0.0;

  const bool includes_one = window_has_one(window);
  if (includes_one && g.pole_at_one() && diverges_at_one()) return kInfinity;

  double total = 0.0;
  if (atom_ > 0.0 && includes_one) total += atom_ * integrand_at(g, 1.0, 0.0);
  return total + (1.0 - atom_) * integrate_rep(g, window, opts);
}

double FitnessDistribution::integrate_rep(const Integrand& g, Window w, const IntegrationOptions& opts) const {
  const bool want_quad = opts.method == IntegrationMethod::Quadrature;
  const bool want_exact = opts.method == IntegrationMethod::Exact;

  return std::visit(
      overloaded{
          [&](const Discrete& d) {
            if (!want_quad && g.kind == IntegrandKind::One) {
              auto mass_upto = [&](double x) {
                const auto it = std::upper_bound(d.points.begin(), d.points.end(), x,
                                                 [](double v, const DiscretePoint& p) { return v < p.value; });
                return it == d.points.begin() ? 0.0 : cumulative_[(it - d.points.begin()) - 1];
              };
              return mass_upto(w.hi) - mass_upto(w.lo);
            }
            double sum = 0.0;
            for (const auto& p : d.points) {
              if (p.value <= w.lo || p.value > w.hi) continue;
              sum += p.mass * integrand_at(g, p.value, 1.0 - p.value);
            }
            return sum;
          },
          [&](const PiecewiseDensity& d) {
            const bool closed_form = g.kind != IntegrandKind::GammaK && g.kind != IntegrandKind::YuleSurvival &&
                                     g.kind != IntegrandKind::YuleMeanTail;
            if (want_exact && !closed_form) throw ContractViolation("no closed form for this integrand");
            long double sum = 0.0L;
            for (std::size_t j = 0; j < d.coeffs.size(); ++j) {
              const double a = std::max(d.edges[j], w.lo);
              const double b = std::min(d.edges[j + 1], w.hi);
              if (!(b > a) || is_zero_poly(d.coeffs[j])) continue;
              const auto p = detail::to_poly(d.coeffs[j]);
              if (!closed_form || want_quad) {
                auto h = [&](double f, double omf) {
                  return integrand_at(g, f, omf) * static_cast<double>(detail::eval(p, f));
                };
                sum += quad(h, a, b, opts.abs_tol);
                continue;
              }
              switch (g.kind) {
                case IntegrandKind::One:
                  sum += detail::definite(p, a, b);
                  break;
                case IntegrandKind::Identity:
                  sum += detail::definite(detail::times_f(p), a, b);
                  break;
                case IntegrandKind::InvOneMinus:
                  sum += rational_integral(p, 1.0, a, b);
                  break;
                case IntegrandKind::FOverOneMinus:
                  sum += rational_integral(detail::times_f(p), 1.0, a, b);
                  break;
                case IntegrandKind::FOverThetaMinus:
                  sum += rational_integral(detail::times_f(p), g.theta, a, b);
                  break;
                case IntegrandKind::ThetaOverThetaMinus:
                  sum += detail::definite(p, a, b) + rational_integral(detail::times_f(p), g.theta, a, b);
                  break;
                default:
                  break;
              }
            }
            return static_cast<double>(sum);
          },
          [&](const BetaShape& b) {
            const double al = b.alpha, be = b.beta;
            auto reg = [&](double a1, double b1) {
              return boost::math::ibeta(a1, b1, w.hi) - boost::math::ibeta(a1, b1, w.lo);
            };
            if (!want_quad) {
              switch (g.kind) {
                case IntegrandKind::One:
                  return reg(al, be);
                case IntegrandKind::Identity:
                  return al / (al + be) * reg(al + 1.0, be);
                case IntegrandKind::InvOneMinus:
                  if (be > 1.0) return boost::math::beta(al, be - 1.0) / beta_norm_ * reg(al, be - 1.0);
                  break;
                case IntegrandKind::FOverOneMinus:
                  if (be > 1.0) return boost::math::beta(al + 1.0, be - 1.0) / beta_norm_ * reg(al + 1.0, be - 1.0);
                  break;
                case IntegrandKind::FOverThetaMinus:
                  if (g.theta == 1.0 && be > 1.0)
                    return boost::math::beta(al + 1.0, be - 1.0) / beta_norm_ * reg(al + 1.0, be - 1.0);
                  break;
                default:
                  break;
              }
              if (want_exact) throw ContractViolation("no closed form for this integrand");
            }
            auto h = [&](double f, double omf) {
              const double dens = std::pow(f, al - 1.0) * std::pow(omf, be - 1.0) / beta_norm_;
              return dens == 0.0 ? 0.0 : integrand_at(g, f, omf) * dens;
            };
            return quad(h, w.lo, w.hi, opts.abs_tol);
          },
          [&](const Uniform&) {
            static const PiecewiseDensity unit{{0.0, 1.0}, {{1.0}}};
            FitnessDistribution as_density({unit, 0.0});
            return as_density.integrate_rep(g, w, opts);
          },
      },
      rep_);
}

std::string FitnessDistribution::describe() const {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const Discrete& d) { out << "discrete(" << d.points.size() << " points)"; },
                 [&](const PiecewiseDensity& d) { out << "density(" << d.coeffs.size() << " pieces)"; },
                 [&](const BetaShape& b) { out << "beta(" << b.alpha << ", " << b.beta << ")"; },
                 [&](const Uniform&) { out << "uniform(0, 1)"; },
             },
             rep_);
  if (atom_ > 0.0) out << " + " << atom_ << " delta_1";
  return out.str();
}

}  // namespace pafit
