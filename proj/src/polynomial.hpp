#pragma once

// Dense polynomials in ascending-power form, evaluated in long double.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pafit::detail {

using Poly = std::vector<long double>;

inline Poly to_poly(std::span<const double> c) { return Poly(c.begin(), c.end()); }

inline long double eval(const Poly& p, long double x) {
  long double acc = 0.0L;
  for (std::size_t m = p.size(); m-- > 0;) acc = acc * x + p[m];
  return acc;
}

inline long double abs_sum(const Poly& p) {
  long double s = 0.0L;
  for (auto c : p) s += std::fabs(c);
  return s;
}

/// Primitive vanishing at 0.
inline long double primitive(const Poly& p, long double x) {
  long double acc = 0.0L;
  for (std::size_t m = p.size(); m-- > 0;) acc = acc * x + p[m] / static_cast<long double>(m + 1);
  return acc * x;
}

inline long double definite(const Poly& p, long double a, long double b) {
  return primitive(p, b) - primitive(p, a);
}

/// p(f) * f
inline Poly times_f(const Poly& p) {
  Poly out(p.size() + 1, 0.0L);
  for (std::size_t m = 0; m < p.size(); ++m) out[m + 1] = p[m];
  return out;
}

/// Writes p(f) = p(root) + (f - root) q(f); returns p(root).
inline long double divide_linear(const Poly& p, long double root, Poly& q) {
  if (p.empty()) {
    q.clear();
    return 0.0L;
  }
  q.assign(p.size() - 1, 0.0L);
  long double carry = p.back();
  for (std::size_t m = p.size() - 1; m-- > 0;) {
    q[m] = carry;
    carry = p[m] + root * carry;
  }
  return carry;
}

/// Zero test for p(root) used when deciding integrability at a pole.
inline bool negligible_at(const Poly& p, long double root) {
  return std::fabs(eval(p, root)) <= 1e-12L * (abs_sum(p) + 1e-300L);
}

}  // namespace pafit::detail
