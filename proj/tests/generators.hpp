#pragma once

// Hand-rolled random case generators for property tests. Each case is built
// from its own seed so a failure can be replayed from the reported seed.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "pafit/measures.hpp"
#include "oracles.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::size_t index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Two to six points in (0, 1], one of them at 1, positive masses.
inline pafit::FitnessDistribution discrete(Rng& rng) {
  const std::size_t count = index(rng, 2, 6);
  std::vector<pafit::DiscretePoint> pts;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double v = i == 0 ? 1.0 : uniform(rng, 0.01, 0.99);
    const double m = uniform(rng, 0.05, 1.0);
    pts.push_back({v, m});
    total += m;
  }
  for (auto& p : pts) p.mass /= total;
  return pafit::FitnessDistribution::discrete(pts);
}

/// One to three pieces, each with non-negative polynomial coefficients.
inline pafit::FitnessDistribution density(Rng& rng) {
  const std::size_t pieces = index(rng, 1, 3);
  std::vector<double> edges{0.0};
  for (std::size_t j = 1; j < pieces; ++j) edges.push_back(uniform(rng, edges.back() + 0.05, 0.9));
  edges.push_back(1.0);
  std::vector<std::vector<double>> coeffs;
  double total = 0.0;
  for (std::size_t j = 0; j < pieces; ++j) {
    std::vector<double> c(index(rng, 1, 4));
    for (auto& x : c) x = uniform(rng, 0.0, 2.0);
    c[0] += 0.1;
    total += oracle::poly_integral(c, edges[j], edges[j + 1]);
    coeffs.push_back(c);
  }
  for (auto& c : coeffs)
    for (auto& x : c) x /= total;
  return pafit::FitnessDistribution::density(edges, coeffs);
}

inline pafit::FitnessDistribution beta(Rng& rng) {
  return pafit::FitnessDistribution::beta(uniform(rng, 0.6, 4.0), uniform(rng, 0.6, 4.0));
}

/// Any representation, optionally with an explicit atom at one.
inline pafit::FitnessDistribution any(Rng& rng, bool allow_atom = true) {
  pafit::FitnessDistribution d = [&] {
    switch (index(rng, 0, 3)) {
      case 0:
        return discrete(rng);
      case 1:
        return density(rng);
      case 2:
        return beta(rng);
      default:
        return pafit::FitnessDistribution::uniform();
    }
  }();
  if (allow_atom && index(rng, 0, 3) == 0) {
    auto raw = d.raw();
    raw.top_atom = uniform(rng, 0.01, 0.4);
    return pafit::FitnessDistribution(raw);
  }
  return d;
}

/// Runs `body` on `cases` generated inputs; the case seed is attached to any
/// failure message.
template <class Body>
void for_all(int cases, std::uint64_t seed, Body body) {
  for (int c = 0; c < cases; ++c) {
    const std::uint64_t case_seed = seed * 1000003ULL + static_cast<std::uint64_t>(c);
    INFO("case seed ", case_seed);
    Rng rng(case_seed);
    body(rng);
  }
}

}  // namespace gen
