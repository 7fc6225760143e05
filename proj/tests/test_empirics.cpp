#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "pafit/empirics.hpp"
#include "pafit/simulator.hpp"

#include <omp.h>

using namespace pafit;

namespace {

FitnessDistribution two_point() { return FitnessDistribution::discrete({{0.5, 0.5}, {1.0, 0.5}}); }
FitnessDistribution be_law() { return FitnessDistribution::density({0.0, 1.0}, {{3.0, -6.0, 3.0}}); }

GraphState grown(const FitnessDistribution& d, double lambda, std::size_t n, std::uint64_t seed) {
  GraphState g(d, lambda, AttachmentModel::m1(), seed);
  while (g.n() < n) g.step();
  return g;
}

// Brute-force snapshot straight from the definitions.
void check_against_brute_force(const GraphState& g, const EmpiricalSnapshot& s) {
  const std::size_t n = g.n();
  std::vector<std::uint64_t> impact(s.bins, 0), ck(s.max_k, 0), ckb(s.bins * s.max_k, 0);
  std::uint64_t tail = 0, top = 0, zmax = 0;
  double fmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = g.impact()[i];
    const auto b = oracle::exact_bin(g.fitness_units()[i], s.bins);
    impact[b] += z;
    if (z <= s.max_k) {
      ck[z - 1] += 1;
      ckb[(z - 1) * s.bins + b] += 1;
    } else {
      ++tail;
    }
    if (g.fitness(i) >= 1.0 - s.epsilon) top += z;
    if (z > zmax) {
      zmax = z;
      fmax = g.fitness(i);
    }
  }
  CHECK(s.impact_per_bin == impact);
  CHECK(s.count_k == ck);
  CHECK(s.count_k_bin == ckb);
  CHECK(s.count_tail == tail);
  CHECK(s.top_window_impact == top);
  CHECK(s.max_impact == zmax);
  CHECK(s.fitness_of_max == fmax);
  CHECK(s.total_impact == g.total_impact());
  CHECK(s.fbar == g.fbar());
}

}  // namespace

TEST_CASE("binning uses half-open bins (b/B, (b+1)/B]") {
  const Binning b(20);
  CHECK(b.bin_of(1.0) == 19);
  CHECK(b.bin_of(0.5) == 9);
  CHECK(b.bin_of(std::nextafter(0.5, 1.0)) == 10);
  CHECK(b.bin_of(0.05) == 0);
  CHECK(b.bin_of(1e-300) == 0);
  const Binning ten(10);
  for (std::size_t k = 1; k <= 10; ++k) CHECK(ten.bin_of(ten.edge(k)) == k - 1);
  CHECK_THROWS(Binning(0));
}

TEST_CASE("property: snapshot matches a brute-force recount") {
  gen::for_all(12, 41, [](gen::Rng& rng) {
    const auto d = gen::any(rng);
    const auto g = grown(d, gen::uniform(rng, 0.3, 3.0), gen::index(rng, 1, 4000), rng());
    SnapshotOptions opts{gen::index(rng, 1, 40), gen::index(rng, 1, 12), gen::uniform(rng, 0.01, 1.0)};
    const auto s = snapshot(g, opts);
    check_against_brute_force(g, s);
    CHECK(s.gamma().total() == doctest::Approx(s.total_mass()).epsilon(1e-12));
  });
}

TEST_CASE("parallel snapshot equals the serial reference") {
  const auto g = grown(FitnessDistribution::uniform(), 1.0, 150000, 42);
  const SnapshotOptions opts{50, 10, 0.05};
  const auto serial = reference::snapshot_serial(g, opts);
  check_against_brute_force(g, serial);
  for (int threads : {1, 2, 4, 7}) {
    omp_set_num_threads(threads);
    CHECK(snapshot(g, opts) == serial);
  }
}

TEST_CASE("top window includes its left edge") {
  const auto g = grown(two_point(), 1.0, 200, 3);
  const auto s = snapshot(g, {10, 5, 0.5});
  CHECK(s.top_window_impact == s.total_impact);  // every fitness is 0.5 or 1
  const auto narrow = snapshot(g, {10, 5, 0.25});
  std::uint64_t at_one = 0;
  for (std::size_t i = 0; i < g.n(); ++i)
    if (g.fitness(i) == 1.0) at_one += g.impact()[i];
  CHECK(narrow.top_window_impact == at_one);
}

TEST_CASE("predicted masses on the same bins") {
  const auto d = be_law();
  const auto gamma = limit_gamma(d, 1.0);
  const auto pred = predict_binned(gamma, d, Binning(20));
  CHECK(pred.total() == doctest::Approx(2.0).epsilon(1e-10));
  // last bin (0.95, 1]: 3 int (1 - f) df + atom 1/2
  CHECK(pred.mass.back() == doctest::Approx(3.0 * 0.05 * 0.05 / 2.0 + 0.5).epsilon(1e-10));
  CHECK(predicted_top_mass(gamma, d, 0.1) == doctest::Approx(0.515).epsilon(1e-10));

  const auto g = grown(d, 1.0, 1000, 5);
  const auto diag = condensation_diagnostic(snapshot(g, {20, 5, 0.1}), gamma, d);
  CHECK(diag.predicted == doctest::Approx(0.515).epsilon(1e-10));
  CHECK(diag.mu_only == doctest::Approx(0.015).epsilon(1e-10));
}

TEST_CASE("compare_binned distances") {
  const auto r = compare_binned({{0.1, 0.5, 0.4}}, {{0.2, 0.5, 0.1}});
  CHECK(r.max_error == doctest::Approx(0.3));
  CHECK(r.l1 == doctest::Approx(0.4));
  CHECK_THROWS(compare_binned({{0.1}}, {{0.1, 0.2}}));
}

TEST_CASE("mean and standard error") {
  const auto m = mean_stderr({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  // sample sd sqrt(5/3), over sqrt(4)
  CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(mean_stderr({7.0}).stderr_ == 0.0);
}

TEST_CASE("aggregation keeps replica order and rejects mixed shapes") {
  std::vector<EmpiricalSnapshot> snaps;
  for (std::uint64_t seed : {1, 2, 3}) snaps.push_back(snapshot(grown(two_point(), 2.0, 500, seed), {20, 5, 0.1}));
  const auto a = aggregate_snapshots(snaps);
  CHECK(a.replicas == 3);
  CHECK(a.n == 500);
  CHECK(a.fbar.mean == doctest::Approx((snaps[0].fbar + snaps[1].fbar + snaps[2].fbar) / 3.0));
  CHECK(a.pk[0].mean == doctest::Approx((snaps[0].pk(1) + snaps[1].pk(1) + snaps[2].pk(1)) / 3.0));
  CHECK(a.gamma_k.size() == 5);
  snaps.push_back(snapshot(grown(two_point(), 2.0, 400, 4), {20, 5, 0.1}));
  CHECK_THROWS(aggregate_snapshots(snaps));
}
