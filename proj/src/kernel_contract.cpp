#include "pafit/kernel_contract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

namespace pafit {

namespace {

double normal_upper_quantile(double tail) {
  static const boost::math::normal standard;
  return boost::math::quantile(boost::math::complement(standard, tail));
}

double poisson_lower(std::uint64_t count, double alpha) {
  if (count == 0) return 0.0;
  return boost::math::gamma_p_inv(static_cast<double>(count), alpha / 2.0);
}

double poisson_upper(std::uint64_t count, double alpha) {
  return boost::math::gamma_p_inv(static_cast<double>(count) + 1.0, 1.0 - alpha / 2.0);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t t) {
  return derive_seed(derive_seed(seed, n), t);
}

// Positions of tested vertices, looked up by vertex index.
struct VertexLookup {
  std::vector<std::pair<std::size_t, std::size_t>> sorted;  // (vertex, column)
  explicit VertexLookup(const std::vector<std::size_t>& vertices) {
    for (std::size_t j = 0; j < vertices.size(); ++j) sorted.emplace_back(vertices[j], j);
    std::sort(sorted.begin(), sorted.end());
  }
  std::ptrdiff_t column(std::size_t vertex) const {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), std::pair<std::size_t, std::size_t>{vertex, 0});
    if (it == sorted.end() || it->first != vertex) return -1;
    return static_cast<std::ptrdiff_t>(it->second);
  }
};

FrozenSample prepare(const GraphState& state, const std::vector<std::size_t>& vertices, std::uint64_t trials) {
  FrozenSample s;
  s.n = state.n();
  s.trials = trials;
  s.vertices = vertices;
  const KernelView view = state.view();
  for (auto v : vertices) {
    if (v >= state.n()) throw ContractViolation("tested vertex does not exist");
    s.expected.push_back(view.expected_increment(v));
  }
  s.counts.assign(trials * vertices.size(), 0);
  return s;
}

void fill_row(const AttachmentModel& model, const KernelView& view, const VertexLookup& lookup, std::uint64_t seed,
              std::uint64_t t, std::vector<Increment>& scratch, std::uint64_t* row) {
  RandomStream rng(trial_seed(seed, view.n, t));
  model.draw(view, rng, scratch);
  normalize_increments(scratch, view.n);
  for (const auto& inc : scratch) {
    const auto col = lookup.column(inc.vertex);
    if (col >= 0) row[col] = static_cast<std::uint64_t>(inc.count);
  }
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::Pass;
}

std::vector<std::size_t> choose_vertices(const GraphState& state, std::size_t count, std::uint64_t seed) {
  const std::size_t n = state.n();
  if (count >= n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto heavier = [&](std::size_t a, std::size_t b) {
    const auto wa = state.weights().weight(a), wb = state.weights().weight(b);
    return wa != wb ? wa > wb : a < b;
  };
  const std::size_t top = std::max<std::size_t>(1, count / 2);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(), heavier);
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));

  RandomStream rng(derive_seed(seed ^ 0x5EEDC0DEULL, n));
  const KernelView view = state.view();
  for (std::size_t attempt = 0; out.size() < count && attempt < 64 * count; ++attempt) {
    const std::size_t v = view.sample_vertex(rng);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

FrozenSample resample(const AttachmentModel& model, const GraphState& state, const std::vector<std::size_t>& vertices,
                      std::uint64_t trials, std::uint64_t seed) {
  FrozenSample s = prepare(state, vertices, trials);
  const KernelView view = state.view();
  const VertexLookup lookup(vertices);
  const std::size_t m = vertices.size();
  const auto total = static_cast<std::int64_t>(trials);
#pragma omp parallel
  {
    std::vector<Increment> scratch;
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < total; ++t) {
      const auto tt = static_cast<std::uint64_t>(t);
      fill_row(model, view, lookup, seed, tt, scratch, s.counts.data() + tt * m);
    }
  }
  return s;
}

namespace reference {

FrozenSample resample_serial(const AttachmentModel& model, const GraphState& state,
                             const std::vector<std::size_t>& vertices, std::uint64_t trials, std::uint64_t seed) {
  FrozenSample s = prepare(state, vertices, trials);
  const KernelView view = state.view();
  const VertexLookup lookup(vertices);
  std::vector<Increment> scratch;
  for (std::uint64_t t = 0; t < trials; ++t)
    fill_row(model, view, lookup, seed, t, scratch, s.counts.data() + t * vertices.size());
  return s;
}

}  // namespace reference

A1Result check_A1(const FrozenSample& sample, double significance) {
  A1Result r;
  const std::size_t m = sample.vertices.size();
  if (m == 0 || sample.trials < 2) return r;
  r.threshold = normal_upper_quantile(significance / (2.0 * static_cast<double>(m)));
  const double trials = static_cast<double>(sample.trials);
  bool any_pass = false, any_fail = false;
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (std::uint64_t t = 0; t < sample.trials; ++t) sum += static_cast<double>(sample.at(t, j));
    const double mean = sum / trials;
    double ss = 0.0;
    for (std::uint64_t t = 0; t < sample.trials; ++t) {
      const double d = static_cast<double>(sample.at(t, j)) - mean;
      ss += d * d;
    }
    const double var = ss / (trials - 1.0);
    VertexMoment vm{sample.vertices[j], sample.expected[j], mean, var, 0.0, Verdict::Inconclusive};
    const double expected = sample.expected[j];
    if (var == 0.0) {
      if (std::fabs(mean - expected) <= 1e-12 * std::max(1.0, expected))
        vm.verdict = Verdict::Pass;
      else if (expected * trials >= 5.0)
        vm.verdict = Verdict::Fail;
    } else {
      vm.z = (mean - expected) / std::sqrt(var / trials);
      r.worst_abs_z = std::max(r.worst_abs_z, std::fabs(vm.z));
      if (std::fabs(vm.z) > r.threshold)
        vm.verdict = Verdict::Fail;
      else if (expected * trials >= 5.0)
        vm.verdict = Verdict::Pass;
    }
    any_pass |= vm.verdict == Verdict::Pass;
    any_fail |= vm.verdict == Verdict::Fail;
    r.vertices.push_back(vm);
  }
  r.verdict = any_fail ? Verdict::Fail : (any_pass ? Verdict::Pass : Verdict::Inconclusive);
  return r;
}

A1Result check_A1(const AttachmentModel& model, const GraphState& state, const ContractOptions& opts) {
  const auto vertices = choose_vertices(state, opts.tested_vertices, opts.seed);
  return check_A1(resample(model, state, vertices, opts.trials, opts.seed), opts.significance);
}

double variance_ratio(const FrozenSample& sample) {
  double worst = std::numeric_limits<double>::quiet_NaN();
  const double trials = static_cast<double>(sample.trials);
  for (std::size_t j = 0; j < sample.vertices.size(); ++j) {
    double sum = 0.0, sq = 0.0;
    for (std::uint64_t t = 0; t < sample.trials; ++t) {
      const double x = static_cast<double>(sample.at(t, j));
      sum += x;
      sq += x * x;
    }
    if (sum == 0.0) continue;
    const double mean = sum / trials;
    const double var = std::max(0.0, (sq - trials * mean * mean) / (trials - 1.0));
    const double ratio = var / mean;
    worst = std::isnan(worst) ? ratio : std::max(worst, ratio);
  }
  return worst;
}

A2Result check_A2(const std::vector<FrozenSample>& samples) {
  A2Result r;
  for (const auto& s : samples) {
    const double ratio = variance_ratio(s);
    if (std::isnan(ratio) || ratio <= 0.0) continue;
    r.n.push_back(s.n);
    r.ratio.push_back(ratio);
    r.c_var = std::max(r.c_var, ratio);
  }
  if (r.n.empty()) return r;
  if (r.n.size() == 1) {
    r.verdict = Verdict::Pass;
    return r;
  }
  double mx = 0.0, my = 0.0;
  const double cnt = static_cast<double>(r.n.size());
  for (std::size_t i = 0; i < r.n.size(); ++i) {
    mx += std::log(static_cast<double>(r.n[i]));
    my += std::log(r.ratio[i]);
  }
  mx /= cnt;
  my /= cnt;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < r.n.size(); ++i) {
    const double dx = std::log(static_cast<double>(r.n[i])) - mx;
    sxy += dx * (std::log(r.ratio[i]) - my);
    sxx += dx * dx;
  }
  r.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const bool grows = r.slope > 0.5 && r.ratio.back() > 2.0 * r.ratio.front();
  r.verdict = grows ? Verdict::Fail : Verdict::Pass;
  return r;
}

PairCheck check_A3_A5(const FrozenSample& sample, double significance) {
  PairCheck r;
  const std::size_t m = sample.vertices.size();
  if (m < 2 || sample.trials < 2) return r;
  r.pairs = m * (m - 1) / 2;
  const double trials = static_cast<double>(sample.trials);
  const double thr3 = std::max(3.0, normal_upper_quantile(significance / static_cast<double>(r.pairs)));
  const double thr5 = std::max(3.0, normal_upper_quantile(significance / static_cast<double>(9 * r.pairs)));
  r.threshold = thr3;

  // Returns cov / se with the sign convention "positive means positively correlated".
  auto cov_z = [&](auto&& x, auto&& y) {
    double mx = 0.0, my = 0.0;
    for (std::uint64_t t = 0; t < sample.trials; ++t) {
      mx += x(t);
      my += y(t);
    }
    mx /= trials;
    my /= trials;
    double su = 0.0;
    for (std::uint64_t t = 0; t < sample.trials; ++t) su += (x(t) - mx) * (y(t) - my);
    const double cov = su / (trials - 1.0);
    const double mu = su / trials;
    double ss = 0.0;
    for (std::uint64_t t = 0; t < sample.trials; ++t) {
      const double d = (x(t) - mx) * (y(t) - my) - mu;
      ss += d * d;
    }
    const double se = std::sqrt(ss / (trials - 1.0) / trials);
    if (se == 0.0) return cov > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
    return cov / se;
  };

  bool fail3 = false, fail5 = false;
  r.worst_a3_z = -std::numeric_limits<double>::infinity();
  r.worst_a5_z = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double z = cov_z([&](std::uint64_t t) { return static_cast<double>(sample.at(t, a)); },
                             [&](std::uint64_t t) { return static_cast<double>(sample.at(t, b)); });
      r.worst_a3_z = std::max(r.worst_a3_z, z);
      fail3 |= z > thr3;
      for (std::uint64_t k = 0; k <= 2; ++k) {
        for (std::uint64_t l = 0; l <= 2; ++l) {
          const double z5 = cov_z([&](std::uint64_t t) { return sample.at(t, a) <= k ? 1.0 : 0.0; },
                                  [&](std::uint64_t t) { return sample.at(t, b) <= l ? 1.0 : 0.0; });
          r.worst_a5_z = std::max(r.worst_a5_z, z5);
          fail5 |= z5 > thr5;
        }
      }
    }
  }
  r.a3 = fail3 ? Verdict::Fail : Verdict::Pass;
  r.a5 = fail5 ? Verdict::Fail : Verdict::Pass;
  return r;
}

PairCheck check_A3_A5(const AttachmentModel& model, const GraphState& state, const ContractOptions& opts) {
  const auto vertices = choose_vertices(state, opts.tested_vertices, opts.seed);
  return check_A3_A5(resample(model, state, vertices, opts.trials, opts.seed), opts.significance);
}

std::vector<A4Point> a4_statistics(const AttachmentModel& model, const GraphState& state,
                                   const std::vector<std::uint64_t>& impacts, std::uint64_t trials,
                                   std::uint64_t seed, double significance) {
  const std::size_t nk = impacts.size();
  std::vector<A4Point> pts(nk);
  const KernelView view = state.view();
  const auto impact = state.impact();
  for (std::size_t j = 0; j < nk; ++j) {
    pts[j].n = state.n();
    pts[j].impact_k = impacts[j];
  }
  for (std::size_t i = 0; i < state.n(); ++i) {
    for (std::size_t j = 0; j < nk; ++j) {
      if (impact[i] != impacts[j]) continue;
      pts[j].vertices += 1;
      pts[j].expected_sum += view.expected_increment(i);
    }
  }

  std::vector<std::uint64_t> events(nk, 0), heavy(nk, 0), singles(nk, 0);
  const auto total = static_cast<std::int64_t>(trials);
  const std::uint64_t a4_seed = seed ^ 0xA4A4A4A4ULL;
#pragma omp parallel
  {
    std::vector<std::uint64_t> le(nk, 0), lh(nk, 0), ls(nk, 0);
    std::vector<Increment> scratch;
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < total; ++t) {
      RandomStream rng(trial_seed(a4_seed, view.n, static_cast<std::uint64_t>(t)));
      model.draw(view, rng, scratch);
      normalize_increments(scratch, view.n);
      for (const auto& inc : scratch) {
        for (std::size_t j = 0; j < nk; ++j) {
          if (impact[inc.vertex] != impacts[j]) continue;
          const auto c = static_cast<std::uint64_t>(inc.count);
          if (c >= 2) {
            le[j] += 1;
            lh[j] += c;
          } else if (c == 1) {
            ls[j] += 1;
          }
        }
      }
    }
#pragma omp critical(pafit_a4_merge)
    for (std::size_t j = 0; j < nk; ++j) {
      events[j] += le[j];
      heavy[j] += lh[j];
      singles[j] += ls[j];
    }
  }

  const double n = static_cast<double>(state.n());
  const double tt = static_cast<double>(trials);
  for (std::size_t j = 0; j < nk; ++j) {
    auto& p = pts[j];
    p.events = events[j];
    p.heavy = heavy[j];
    p.singles = singles[j];
    if (p.vertices == 0) continue;
    const double per = n / (tt * static_cast<double>(p.vertices));
    const double lo = poisson_lower(p.events, significance);
    const double hi = poisson_upper(p.events, significance);
    const double mult = p.events > 0 ? static_cast<double>(p.heavy) / static_cast<double>(p.events) : 2.0;
    p.ge2 = per * static_cast<double>(p.events);
    p.ge2_lo = per * lo;
    p.ge2_hi = per * hi;
    p.heavy_mean = per * static_cast<double>(p.heavy);
    p.heavy_lo = per * lo * mult;
    p.heavy_hi = per * hi * mult;
    p.single_dev = n * (static_cast<double>(p.singles) / tt - p.expected_sum) / static_cast<double>(p.vertices);
  }
  return pts;
}

Verdict a4_trend(const std::vector<A4Point>& along_n) {
  std::vector<const A4Point*> valid;
  for (const auto& p : along_n)
    if (p.vertices > 0) valid.push_back(&p);
  if (valid.size() < 2) return Verdict::Inconclusive;
  const A4Point& first = *valid.front();
  const A4Point& last = *valid.back();
  const double shrink = std::pow(static_cast<double>(first.n) / static_cast<double>(last.n), 0.25);
  auto judge = [&](double first_lo, double first_hi, double last_lo, double last_hi) {
    if (last_lo >= first_hi * shrink) return Verdict::Fail;
    if (last_hi < first_lo) return Verdict::Pass;
    return Verdict::Inconclusive;
  };
  return combine(judge(first.ge2_lo, first.ge2_hi, last.ge2_lo, last.ge2_hi),
                 judge(first.heavy_lo, first.heavy_hi, last.heavy_lo, last.heavy_hi));
}

A4Result check_A4(const AttachmentModel& model, const std::vector<const GraphState*>& states,
                  const ContractOptions& opts) {
  A4Result r;
  std::vector<std::vector<A4Point>> by_k(opts.a4_impacts.size());
  for (const GraphState* s : states) {
    const auto pts = a4_statistics(model, *s, opts.a4_impacts, opts.a4_trials, opts.seed, opts.significance);
    for (std::size_t j = 0; j < pts.size(); ++j) by_k[j].push_back(pts[j]);
  }
  r.verdict = by_k.empty() ? Verdict::Inconclusive : Verdict::Pass;
  for (const auto& seq : by_k) {
    r.verdict = combine(r.verdict, a4_trend(seq));
    r.points.insert(r.points.end(), seq.begin(), seq.end());
  }
  return r;
}

bool ContractReport::all_pass() const {
  return a1 == Verdict::Pass && a2 == Verdict::Pass && a3 == Verdict::Pass && a4 == Verdict::Pass &&
         a5 == Verdict::Pass;
}

std::string ContractReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["verdicts"] = {{"A1", to_string(a1)}, {"A2", to_string(a2)}, {"A3", to_string(a3)},
                   {"A4", to_string(a4)}, {"A5", to_string(a5)}};
  j["c_var"] = c_var;
  j["worst_z"] = {{"A1", worst_a1_z}, {"A3", worst_a3_z}, {"A5", worst_a5_z}};
  j["states_n"] = states_n;
  j["impacts_k"] = impacts_k;
  j["A2"] = {{"n", a2_detail.n}, {"ratio", a2_detail.ratio}, {"slope", a2_detail.slope}};
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : a4_detail.points) {
    pts.push_back({{"n", p.n},
                   {"k", p.impact_k},
                   {"vertices", p.vertices},
                   {"events_ge2", p.events},
                   {"n_P_ge2", p.ge2},
                   {"n_P_ge2_ci", {p.ge2_lo, p.ge2_hi}},
                   {"n_E_heavy", p.heavy_mean},
                   {"n_E_heavy_ci", {p.heavy_lo, p.heavy_hi}},
                   {"n_single_deviation", p.single_dev}});
  }
  j["A4"] = pts;
  return j.dump(2);
}

ContractReport check_contract(const AttachmentModel& model, const std::vector<const GraphState*>& states,
                              const ContractOptions& opts) {
  if (states.empty()) throw std::invalid_argument("kernel check needs at least one frozen state");
  ContractReport rep;
  rep.model = model.name();
  rep.impacts_k = opts.a4_impacts;
  rep.a1 = rep.a3 = rep.a5 = Verdict::Pass;
  rep.worst_a3_z = rep.worst_a5_z = -std::numeric_limits<double>::infinity();
  std::vector<FrozenSample> samples;
  for (const GraphState* s : states) {
    rep.states_n.push_back(s->n());
    const auto vertices = choose_vertices(*s, opts.tested_vertices, opts.seed);
    samples.push_back(resample(model, *s, vertices, opts.trials, opts.seed));
    const auto a1 = check_A1(samples.back(), opts.significance);
    rep.a1 = combine(rep.a1, a1.verdict);
    rep.worst_a1_z = std::max(rep.worst_a1_z, a1.worst_abs_z);
    const auto pc = check_A3_A5(samples.back(), opts.significance);
    rep.a3 = combine(rep.a3, pc.a3);
    rep.a5 = combine(rep.a5, pc.a5);
    rep.worst_a3_z = std::max(rep.worst_a3_z, pc.worst_a3_z);
    rep.worst_a5_z = std::max(rep.worst_a5_z, pc.worst_a5_z);
  }
  rep.a2_detail = check_A2(samples);
  rep.a2 = rep.a2_detail.verdict;
  rep.c_var = rep.a2_detail.c_var;
  rep.a4_detail = check_A4(model, states, opts);
  rep.a4 = rep.a4_detail.verdict;
  if (!std::isfinite(rep.worst_a3_z)) rep.worst_a3_z = 0.0;
  if (!std::isfinite(rep.worst_a5_z)) rep.worst_a5_z = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Demo kernels

AttachmentModel pathological_kernel(std::string_view name) {
  if (name == "uniform") {
    return AttachmentModel::custom("uniform", [](const KernelView& v, RandomStream& rng, std::vector<Increment>& out) {
      const std::uint64_t e = rng.poisson(v.lambda);
      for (std::uint64_t j = 0; j < e; ++j) out.push_back({target_from_bits(rng.bits53(), v.n), 1});
    });
  }
  if (name == "paired") {
    return AttachmentModel::custom("paired", [](const KernelView& v, RandomStream& rng, std::vector<Increment>& out) {
      const std::uint64_t e = rng.poisson(v.lambda / 2.0);
      for (std::uint64_t j = 0; j < e; ++j) out.push_back({v.sample_vertex(rng), 2});
    });
  }
  if (name == "coupled") {
    return AttachmentModel::custom("coupled", [](const KernelView& v, RandomStream& rng, std::vector<Increment>& out) {
      const std::uint64_t e = rng.poisson(v.lambda / 2.0);
      for (std::uint64_t j = 0; j < e; ++j) {
        const std::size_t i = v.sample_vertex(rng);
        const std::size_t partner = (i ^ 1) < v.n ? (i ^ 1) : i;
        out.push_back({i, 1});
        out.push_back({partner, 1});
      }
    });
  }
  if (name == "burst") {
    return AttachmentModel::custom("burst", [](const KernelView& v, RandomStream& rng, std::vector<Increment>& out) {
      const double size = std::max(std::ceil(v.lambda), std::ceil(std::pow(static_cast<double>(v.n), 0.75)));
      if (rng.uniform() < v.lambda / size) out.push_back({v.sample_vertex(rng), static_cast<std::int64_t>(size)});
    });
  }
  throw std::invalid_argument("unknown demo kernel: " + std::string(name));
}

std::vector<std::string> pathological_kernel_names() { return {"uniform", "burst", "coupled", "paired"}; }

}  // namespace pafit
