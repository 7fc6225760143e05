#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "pafit/graph.hpp"
#include "pafit/simulator.hpp"

using namespace pafit;

namespace {

FitnessDistribution two_point() { return FitnessDistribution::discrete({{0.5, 0.5}, {1.0, 0.5}}); }

void grow(GraphState& g, std::size_t n) {
  while (g.n() < n) g.step();
}

}  // namespace

TEST_CASE("fitness quantisation") {
  CHECK(quantize_fitness(1.0) == kFitnessScale);
  CHECK(quantize_fitness(0.5) == kFitnessScale / 2);
  CHECK(quantize_fitness(1e-300) == 1);
  CHECK(fitness_value(quantize_fitness(0.25)) == 0.25);
  CHECK(std::fabs(fitness_value(quantize_fitness(0.3)) - 0.3) <= 0.5 / kFitnessScale);
}

TEST_CASE("a new graph is a single vertex without edges") {
  GraphState g(two_point(), 2.0, AttachmentModel::m1(), 5);
  CHECK(g.n() == 1);
  CHECK(g.edges() == 0);
  CHECK(g.total_impact() == 1);
  CHECK(g.impact()[0] == 1);
  CHECK_NOTHROW(g.audit());
}

TEST_CASE("stream order: attachment draws first, then the new fitness") {
  const auto dist = two_point();
  GraphState g(dist, 1.0, AttachmentModel::m2(), 77);
  g.step();
  g.step();
  RandomStream r(77);
  const auto f0 = quantize_fitness(dist.sample(r));
  (void)r.bits53();  // the single M2 draw at n = 1
  const auto f1 = quantize_fitness(dist.sample(r));
  (void)r.bits53();
  const auto f2 = quantize_fitness(dist.sample(r));
  CHECK(g.fitness_units()[0] == f0);
  CHECK(g.fitness_units()[1] == f1);
  CHECK(g.fitness_units()[2] == f2);
  CHECK(g.rng() == r);
  CHECK(g.impact()[0] == 2);  // the only possible target at n = 1
}

TEST_CASE("M2 places exactly lambda edges per step") {
  GraphState g(two_point(), 3.0, AttachmentModel::m2(), 8, true);
  grow(g, 500);
  CHECK(g.edges() == 3 * 499);
  for (const auto& e : g.edge_log()) CHECK(e.target < e.source);
  CHECK_NOTHROW(g.audit());
}

TEST_CASE("M2 rejects a non-integer lambda") {
  CHECK_THROWS(GraphState(two_point(), 1.5, AttachmentModel::m2(), 1));
  CHECK_NOTHROW(AttachmentModel::m1().validate(1.5));
}

TEST_CASE("M1 places lambda edges per step on average") {
  GraphState g(two_point(), 2.0, AttachmentModel::m1(), 9);
  grow(g, 50001);
  const double per_step = static_cast<double>(g.edges()) / 50000.0;
  CHECK(std::fabs(per_step - 2.0) <= 5.0 * std::sqrt(2.0 / 50000.0));
  // total impact per vertex tends to 1 + lambda
  CHECK(static_cast<double>(g.total_impact()) / static_cast<double>(g.n()) == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("same seed, same graph; different seed, different graph") {
  GraphState a(two_point(), 2.0, AttachmentModel::m1(), 31, true);
  GraphState b(two_point(), 2.0, AttachmentModel::m1(), 31, true);
  GraphState c(two_point(), 2.0, AttachmentModel::m1(), 32, true);
  grow(a, 2000);
  grow(b, 2000);
  grow(c, 2000);
  CHECK(a.edge_log() == b.edge_log());
  CHECK(std::equal(a.impact().begin(), a.impact().end(), b.impact().begin()));
  CHECK(a.edge_log() != c.edge_log());
}

TEST_CASE("increments are normalised and validated") {
  std::vector<Increment> inc{{3, 1}, {1, 2}, {3, 4}, {0, 0}};
  normalize_increments(inc, 5);
  REQUIRE(inc.size() == 2);
  CHECK(inc[0].vertex == 1);
  CHECK(inc[0].count == 2);
  CHECK(inc[1].vertex == 3);
  CHECK(inc[1].count == 5);

  std::vector<Increment> negative{{0, -1}};
  CHECK_THROWS_AS(normalize_increments(negative, 1), ContractViolation);
  std::vector<Increment> missing{{4, 1}};
  CHECK_THROWS_AS(normalize_increments(missing, 4), ContractViolation);

  const auto bad = AttachmentModel::custom("bad", [](const KernelView&, RandomStream&, std::vector<Increment>& out) {
    out.push_back({0, -1});
  });
  GraphState g(two_point(), 1.0, bad, 1);
  CHECK_THROWS_AS(g.step(), ContractViolation);
}

TEST_CASE("resampling a frozen state leaves it untouched") {
  GraphState g(two_point(), 2.0, AttachmentModel::m1(), 3);
  grow(g, 300);
  const auto before = std::vector<std::uint64_t>(g.impact().begin(), g.impact().end());
  RandomStream r(1);
  std::vector<Increment> out;
  for (int i = 0; i < 100; ++i) g.draw_increments(r, out);
  CHECK(std::equal(before.begin(), before.end(), g.impact().begin()));
  CHECK(g.n() == 300);
}

TEST_CASE("expected increment is lambda F_i Z_i / sum F Z") {
  GraphState g(two_point(), 2.0, AttachmentModel::m1(), 4);
  grow(g, 100);
  const auto v = g.view();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double want = g.fitness(i) * static_cast<double>(g.impact()[i]) / (static_cast<double>(g.n()) * g.fbar());
    CHECK(v.expected_increment(i) == doctest::Approx(want).epsilon(1e-12));
    sum += v.expected_increment(i);
  }
  CHECK(sum == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("property: bookkeeping identities hold along random runs") {
  gen::for_all(30, 31, [](gen::Rng& rng) {
    const auto dist = gen::any(rng);
    const bool m2 = gen::index(rng, 0, 1) == 1;
    const double lambda = m2 ? static_cast<double>(gen::index(rng, 1, 4)) : gen::uniform(rng, 0.1, 4.0);
    GraphState g(dist, lambda, m2 ? AttachmentModel::m2() : AttachmentModel::m1(), rng());
    const std::size_t n = gen::index(rng, 2, 3000);
    for (std::size_t step = 1; step < n; ++step) {
      g.step();
      if (step % 500 == 0) REQUIRE_NOTHROW(g.audit());
    }
    REQUIRE_NOTHROW(g.audit());
    CHECK(g.total_impact() == g.n() + g.edges());
    if (m2) CHECK(g.edges() == static_cast<std::uint64_t>(lambda) * (g.n() - 1));
    // lambda fbar = (1/n) sum F Z lies in [min F, 1 + lambda]
    CHECK(g.fbar() * lambda <= static_cast<double>(g.total_impact()) / static_cast<double>(g.n()) + 1e-12);
    CHECK(g.fbar() > 0.0);
  });
}

TEST_CASE("geometric schedule") {
  CHECK(geometric_schedule(1) == std::vector<std::uint64_t>{1});
  CHECK(geometric_schedule(10) == std::vector<std::uint64_t>{1, 2, 4, 8, 10});
  CHECK(geometric_schedule(16) == std::vector<std::uint64_t>{1, 2, 4, 8, 16});
}

TEST_CASE("run takes audited snapshots at the checkpoints") {
  GraphState g(two_point(), 2.0, AttachmentModel::m1(), 6);
  RunOptions opts;
  opts.schedule = {10, 100, 1000};
  int calls = 0;
  const auto traj = run(g, 1000, opts, {[&](const GraphState& s, const EmpiricalSnapshot& snap) {
                          CHECK(s.n() == snap.n);
                          ++calls;
                        }});
  REQUIRE(traj.size() == 3);
  CHECK(traj[0].n == 10);
  CHECK(traj[2].n == 1000);
  CHECK(calls == 3);
  CHECK(g.n() == 1000);

  CHECK_THROWS_AS(run(g, 10, opts), std::invalid_argument);
  // n_target equal to the current size only snapshots what is left
  const auto again = run(g, 1000, opts);
  REQUIRE(again.size() == 1);
  CHECK(again[0].n == 1000);

  GraphState fresh(two_point(), 2.0, AttachmentModel::m1(), 6);
  const auto initial = run(fresh, 1, RunOptions{});
  REQUIRE(initial.size() == 1);
  CHECK(initial[0].n == 1);
}

TEST_CASE("fbar stays inside the a priori corridor") {
  for (double lambda : {0.5, 2.0}) {
    const auto dist = FitnessDistribution::uniform();
    GraphState g(dist, lambda, AttachmentModel::m1(), 10);
    const auto traj = run(g, 20000, RunOptions{});
    const auto c = fbar_corridor(traj, dist, lambda);
    CHECK(c.inside);
    CHECK(c.lower == doctest::Approx(0.5 / lambda - 0.05));
    CHECK(c.upper == doctest::Approx((1.0 + lambda) / lambda + 0.05));
  }
}
