#include "pafit/simulator.hpp"

#include <algorithm>
#include <stdexcept>

namespace pafit {

std::vector<std::uint64_t> geometric_schedule(std::uint64_t n_target) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 1; p < n_target; p *= 2) out.push_back(p);
  out.push_back(n_target);
  return out;
}

std::vector<EmpiricalSnapshot> run(GraphState& state, std::uint64_t n_target, const RunOptions& opts,
                                   const std::vector<Observer>& observers) {
  if (n_target < state.n()) throw std::invalid_argument("n_target is below the current graph size");
  std::vector<std::uint64_t> schedule = opts.schedule.empty() ? geometric_schedule(n_target) : opts.schedule;
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

  std::vector<EmpiricalSnapshot> out;
  auto checkpoint = [&] {
    state.audit();
    out.push_back(snapshot(state, opts.snapshot));
    for (const auto& obs : observers) obs(state, out.back());
  };

  for (std::uint64_t cp : schedule) {
    if (cp < state.n() || cp > n_target) continue;
    while (state.n() < cp) state.step();
    checkpoint();
  }
  while (state.n() < n_target) state.step();
  return out;
}

FbarCorridor fbar_corridor(const std::vector<EmpiricalSnapshot>& trajectory, const FitnessDistribution& dist,
                           double lambda, double slack) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  // (1/n) sum F_j Z_n(j) = lambda * fbar lies asymptotically in [int x dmu, 1 + lambda].
  FbarCorridor c;
  c.lower = dist.integrate(Integrand::identity()) / lambda - slack;
  c.upper = (1.0 + lambda) / lambda + slack;
  const std::uint64_t half = trajectory.back().n / 2;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : trajectory) {
    if (s.n < half) continue;
    sum += s.fbar;
    ++count;
  }
  c.average = sum / static_cast<double>(count);
  c.inside = c.average >= c.lower && c.average <= c.upper;
  return c;
}

}  // namespace pafit
