#include "pafit/empirics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace pafit {

namespace {

constexpr std::size_t kParallelThreshold = std::size_t{1} << 16;

EmpiricalSnapshot empty_snapshot(const GraphState& state, const SnapshotOptions& opts) {
  if (opts.bins < 1 || opts.max_k < 1) throw ContractViolation("snapshot needs bins >= 1 and max_k >= 1");
  if (!(opts.epsilon > 0.0 && opts.epsilon <= 1.0)) throw ContractViolation("epsilon must lie in (0, 1]");
  EmpiricalSnapshot s;
  s.n = state.n();
  s.lambda = state.lambda();
  s.fbar = state.fbar();
  s.total_impact = state.total_impact();
  s.bins = opts.bins;
  s.max_k = opts.max_k;
  s.epsilon = opts.epsilon;
  s.impact_per_bin.assign(opts.bins, 0);
  s.count_k_bin.assign(opts.bins * opts.max_k, 0);
  s.count_k.assign(opts.max_k, 0);
  return s;
}

struct Accumulator {
  std::vector<std::uint64_t> impact_per_bin;
  std::vector<std::uint64_t> count_k_bin;
  std::vector<std::uint64_t> count_k;
  std::uint64_t count_tail = 0;
  std::uint64_t top = 0;
  std::uint64_t max_impact = 0;
  std::size_t argmax = 0;

  Accumulator(std::size_t bins, std::size_t max_k)
      : impact_per_bin(bins, 0), count_k_bin(bins * max_k, 0), count_k(max_k, 0) {}

  void visit(const GraphState& state, const Binning& binning, double top_cut, std::size_t i) {
    const double f = state.fitness(i);
    const std::uint64_t z = state.impact()[i];
    const std::size_t b = binning.bin_of(f);
    impact_per_bin[b] += z;
    const std::size_t max_k = count_k.size();
    if (z <= max_k) {
      count_k[z - 1] += 1;
      count_k_bin[(z - 1) * binning.bins() + b] += 1;
    } else {
      count_tail += 1;
    }
    if (f >= top_cut) top += z;
    if (z > max_impact || (z == max_impact && i < argmax)) {
      max_impact = z;
      argmax = i;
    }
  }

  void merge(const Accumulator& o) {
    for (std::size_t j = 0; j < impact_per_bin.size(); ++j) impact_per_bin[j] += o.impact_per_bin[j];
    for (std::size_t j = 0; j < count_k_bin.size(); ++j) count_k_bin[j] += o.count_k_bin[j];
    for (std::size_t j = 0; j < count_k.size(); ++j) count_k[j] += o.count_k[j];
    count_tail += o.count_tail;
    top += o.top;
    if (o.max_impact > max_impact || (o.max_impact == max_impact && o.argmax < argmax)) {
      max_impact = o.max_impact;
      argmax = o.argmax;
    }
  }

  void store(const GraphState& state, EmpiricalSnapshot& s) {
    s.impact_per_bin = std::move(impact_per_bin);
    s.count_k_bin = std::move(count_k_bin);
    s.count_k = std::move(count_k);
    s.count_tail = count_tail;
    s.top_window_impact = top;
    s.max_impact = max_impact;
    s.fitness_of_max = state.fitness(argmax);
  }
};

}  // namespace

Binning::Binning(std::size_t bins) : bins_(bins) {
  if (bins == 0) throw ContractViolation("binning needs at least one bin");
}

std::size_t Binning::bin_of(double f) const {
  const double scaled = std::ceil(f * static_cast<double>(bins_));
  std::size_t b = scaled <= 1.0 ? 0 : std::min(static_cast<std::size_t>(scaled) - 1, bins_ - 1);
  while (b > 0 && f <= edge(b)) --b;
  while (b + 1 < bins_ && f > edge(b + 1)) ++b;
  return b;
}

double BinnedMeasure::total() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

BinnedMeasure EmpiricalSnapshot::gamma() const {
  BinnedMeasure out;
  out.mass.reserve(bins);
  for (auto z : impact_per_bin) out.mass.push_back(static_cast<double>(z) / static_cast<double>(n));
  return out;
}

BinnedMeasure EmpiricalSnapshot::gamma_k(std::size_t k) const {
  if (k < 1 || k > max_k) throw std::out_of_range("impact k outside 1..K");
  BinnedMeasure out;
  out.mass.reserve(bins);
  for (std::size_t b = 0; b < bins; ++b)
    out.mass.push_back(static_cast<double>(count_k_bin[(k - 1) * bins + b]) / static_cast<double>(n));
  return out;
}

double EmpiricalSnapshot::pk(std::size_t k) const {
  if (k < 1 || k > max_k) throw std::out_of_range("impact k outside 1..K");
  return static_cast<double>(count_k[k - 1]) / static_cast<double>(n);
}

double EmpiricalSnapshot::tail_fraction() const { return static_cast<double>(count_tail) / static_cast<double>(n); }

EmpiricalSnapshot snapshot(const GraphState& state, const SnapshotOptions& opts) {
  if (state.n() < kParallelThreshold) return reference::snapshot_serial(state, opts);
  EmpiricalSnapshot s = empty_snapshot(state, opts);
  const Binning binning(opts.bins);
  const double top_cut = 1.0 - opts.epsilon;
  const auto n = static_cast<std::int64_t>(state.n());
  Accumulator total(opts.bins, opts.max_k);
#pragma omp parallel
  {
    Accumulator local(opts.bins, opts.max_k);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) local.visit(state, binning, top_cut, static_cast<std::size_t>(i));
#pragma omp critical(pafit_snapshot_merge)
    total.merge(local);
  }
  total.store(state, s);
  return s;
}

namespace reference {

EmpiricalSnapshot snapshot_serial(const GraphState& state, const SnapshotOptions& opts) {
  EmpiricalSnapshot s = empty_snapshot(state, opts);
  const Binning binning(opts.bins);
  const double top_cut = 1.0 - opts.epsilon;
  Accumulator acc(opts.bins, opts.max_k);
  for (std::size_t i = 0; i < state.n(); ++i) acc.visit(state, binning, top_cut, i);
  acc.store(state, s);
  return s;
}

}  // namespace reference

BinnedMeasure predict_binned(const LimitMeasure& limit, const FitnessDistribution& dist, const Binning& binning) {
  BinnedMeasure out;
  out.mass.reserve(binning.bins());
  for (std::size_t b = 0; b < binning.bins(); ++b) out.mass.push_back(limit.mass(dist, binning.window(b)));
  return out;
}

DistanceReport compare_binned(const BinnedMeasure& empirical, const BinnedMeasure& predicted) {
  if (empirical.mass.size() != predicted.mass.size()) throw std::invalid_argument("bin counts differ");
  DistanceReport r;
  r.empirical = empirical.mass;
  r.predicted = predicted.mass;
  for (std::size_t b = 0; b < empirical.mass.size(); ++b) {
    const double e = std::fabs(empirical.mass[b] - predicted.mass[b]);
    r.abs_error.push_back(e);
    r.max_error = std::max(r.max_error, e);
    r.l1 += e;
  }
  return r;
}

DistanceReport compare_gamma(const EmpiricalSnapshot& snap, const LimitMeasure& limit,
                             const FitnessDistribution& dist) {
  return compare_binned(snap.gamma(), predict_binned(limit, dist, Binning(snap.bins)));
}

double predicted_top_mass(const LimitMeasure& limit, const FitnessDistribution& dist, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ContractViolation("epsilon must lie in (0, 1]");
  // closed at 1 - eps: (nextafter(1 - eps, -inf), 1]
  return limit.mass(dist, Window{std::nextafter(1.0 - epsilon, -1.0), 1.0});
}

CondensationDiagnostic condensation_diagnostic(const EmpiricalSnapshot& snap, const LimitMeasure& limit,
                                               const FitnessDistribution& dist) {
  const Window w{std::nextafter(1.0 - snap.epsilon, -1.0), 1.0};
  const double mu_only = dist.integrate(limit.density_factor, w);
  return {snap.top_window_mass(), predicted_top_mass(limit, dist, snap.epsilon), mu_only};
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return out;
}

SnapshotAggregate aggregate_snapshots(const std::vector<EmpiricalSnapshot>& snaps) {
  if (snaps.empty()) throw std::invalid_argument("nothing to aggregate");
  const auto& first = snaps.front();
  for (const auto& s : snaps)
    if (s.n != first.n || s.bins != first.bins || s.max_k != first.max_k)
      throw std::invalid_argument("snapshots disagree on n, bins or K");

  auto collect = [&](auto&& get) {
    std::vector<double> xs;
    xs.reserve(snaps.size());
    for (const auto& s : snaps) xs.push_back(get(s));
    return mean_stderr(xs);
  };

  SnapshotAggregate a;
  a.n = first.n;
  a.replicas = snaps.size();
  a.fbar = collect([](const EmpiricalSnapshot& s) { return s.fbar; });
  a.total_mass = collect([](const EmpiricalSnapshot& s) { return s.total_mass(); });
  a.top_window_mass = collect([](const EmpiricalSnapshot& s) { return s.top_window_mass(); });
  for (std::size_t b = 0; b < first.bins; ++b)
    a.gamma.push_back(collect([&](const EmpiricalSnapshot& s) {
      return static_cast<double>(s.impact_per_bin[b]) / static_cast<double>(s.n);
    }));
  for (std::size_t k = 1; k <= first.max_k; ++k) {
    a.pk.push_back(collect([&](const EmpiricalSnapshot& s) { return s.pk(k); }));
    std::vector<MeanStderr> row;
    for (std::size_t b = 0; b < first.bins; ++b)
      row.push_back(collect([&](const EmpiricalSnapshot& s) {
        return static_cast<double>(s.count_k_bin[(k - 1) * s.bins + b]) / static_cast<double>(s.n);
      }));
    a.gamma_k.push_back(std::move(row));
  }
  return a;
}

}  // namespace pafit
