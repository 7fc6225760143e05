#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "pafit/measures.hpp"

using namespace pafit;

namespace {

FitnessDistribution two_point() { return FitnessDistribution::discrete({{0.5, 0.5}, {1.0, 0.5}}); }
FitnessDistribution be_law() { return FitnessDistribution::density({0.0, 1.0}, {{3.0, -6.0, 3.0}}); }

}  // namespace

TEST_CASE("normalize_esssup rescales by the essential supremum") {
  SUBCASE("discrete points are divided by s") {
    const auto d = normalize_esssup({Discrete{{{0.25, 0.5}, {0.5, 0.5}}}});
    const auto& pts = std::get<Discrete>(d.representation()).points;
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].value == 0.5);
    CHECK(pts[1].value == 1.0);
    CHECK(pts[0].mass == doctest::Approx(0.5));
  }
  SUBCASE("uniform on [0, 1] is unchanged") {
    const auto d = normalize_esssup({Uniform{}});
    CHECK(std::get<Uniform>(d.representation()).upper == 1.0);
  }
  SUBCASE("uniform density on [0, 2] becomes uniform on [0, 1]") {
    const auto d = normalize_esssup({PiecewiseDensity{{0.0, 2.0}, {{0.5}}}});
    const auto& p = std::get<PiecewiseDensity>(d.representation());
    CHECK(p.edges == std::vector<double>{0.0, 1.0});
    CHECK(p.coeffs[0][0] == doctest::Approx(1.0));
    CHECK(d.integrate(Integrand::identity()) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("zero density above the top is dropped") {
    const auto d = normalize_esssup({PiecewiseDensity{{0.0, 0.5, 1.0}, {{2.0}, {}}}});
    CHECK(std::get<PiecewiseDensity>(d.representation()).edges == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("Dirac input is rejected") {
    CHECK_THROWS_AS(normalize_esssup({Discrete{{{0.3, 1.0}}}}), ContractViolation);
    CHECK_THROWS_AS(FitnessDistribution::discrete({{1.0, 1.0}}), ContractViolation);
  }
  SUBCASE("mass outside (0, s] is rejected") {
    CHECK_THROWS_AS(normalize_esssup({Discrete{{{0.0, 0.5}, {0.5, 0.5}}}}), ContractViolation);
    CHECK_THROWS_AS(normalize_esssup({PiecewiseDensity{{-0.5, 1.0}, {{1.0 / 1.5}}}}), ContractViolation);
  }
}

TEST_CASE("constructor enforces the fitness-law invariants") {
  CHECK_THROWS_AS(FitnessDistribution::discrete({{0.5, 0.5}, {0.9, 0.5}}), ContractViolation);  // ess sup 0.9
  CHECK_THROWS_AS(FitnessDistribution::discrete({{0.5, 0.6}, {1.0, 0.6}}), ContractViolation);  // mass 1.2
  CHECK_THROWS_AS(FitnessDistribution::density({0.0, 1.0}, {{2.0, -4.0}}), ContractViolation);   // negative
  CHECK_THROWS_AS(FitnessDistribution::beta(-1.0, 2.0), ContractViolation);
  CHECK_THROWS_AS(FitnessDistribution(RawDistribution{Uniform{}, 1.0}), ContractViolation);
  // a point mass at 1 next to a continuous part is not Dirac
  CHECK_NOTHROW(FitnessDistribution(RawDistribution{Uniform{}, 0.5}));
}

TEST_CASE("sample inverts the CDF and uses one uniform per draw") {
  const auto d = two_point();
  CHECK(d.quantile(0.3) == 0.5);
  CHECK(d.quantile(0.5) == 0.5);
  CHECK(d.quantile(0.7) == 1.0);

  RandomStream a(99), b(99);
  (void)d.sample(a);
  (void)b.uniform();
  CHECK(a == b);

  RandomStream rng(12345);
  const auto u = FitnessDistribution::uniform();
  double sum = 0.0;
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) sum += u.sample(rng);
  CHECK(std::fabs(sum / kDraws - 0.5) < 0.002);
}

TEST_CASE("quantile of the density law matches its CDF") {
  const auto d = be_law();
  for (double v : {0.01, 0.2, 0.5, 0.875, 0.999}) {
    const double f = d.quantile(v);
    // CDF of 3 (1 - f)^2 is 1 - (1 - f)^3
    CHECK(1.0 - std::pow(1.0 - f, 3.0) == doctest::Approx(v).epsilon(1e-10));
  }
  const auto beta = FitnessDistribution::beta(2.0, 3.0);
  CHECK(beta.integrate(Integrand::one(), Window{0.0, beta.quantile(0.3)}) == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("integrate: catalog examples") {
  CHECK(two_point().integrate(Integrand::f_over_theta_minus(2.0)) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(be_law().integrate(Integrand::f_over_one_minus()) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(FitnessDistribution::uniform().integrate(Integrand::identity()) == doctest::Approx(0.5).epsilon(1e-14));
  const FitnessDistribution with_atom(RawDistribution{Uniform{}, 0.5});
  CHECK(with_atom.integrate(Integrand::inv_one_minus()) == kInfinity);
  CHECK(FitnessDistribution::uniform().integrate(Integrand::f_over_one_minus()) == kInfinity);
  CHECK(two_point().integrate(Integrand::f_over_theta_minus(1.0)) == kInfinity);
}

TEST_CASE("integrate: density law against a Simpson oracle") {
  const auto d = be_law();
  for (double theta : {1.05, 1.5, 3.0}) {
    const double want =
        oracle::simpson([&](double f) { return f / (theta - f) * oracle::be_density(f); }, 0.0, 1.0);
    CHECK(d.integrate(Integrand::f_over_theta_minus(theta)) == doctest::Approx(want).epsilon(1e-10));
    CHECK(d.integrate(Integrand::f_over_theta_minus(theta), {}, {1e-10, IntegrationMethod::Quadrature}) ==
          doctest::Approx(want).epsilon(1e-9));
  }
  // 3 int_0^1 (1 - f) df
  CHECK(d.integrate(Integrand::inv_one_minus()) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(d.integrate(Integrand::inv_one_minus(), Window{0.9, 1.0}) == doctest::Approx(0.015).epsilon(1e-10));
}

TEST_CASE("integrate: Beta law against a Simpson oracle") {
  const auto d = FitnessDistribution::beta(2.0, 3.0);
  const double norm = std::tgamma(2.0) * std::tgamma(3.0) / std::tgamma(5.0);
  auto dens = [&](double f) { return f * (1 - f) * (1 - f) / norm; };
  for (double theta : {1.2, 2.0}) {
    const double want = oracle::simpson([&](double f) { return theta / (theta - f) * dens(f); }, 0.0, 1.0);
    CHECK(d.integrate(Integrand::theta_over_theta_minus(theta)) == doctest::Approx(want).epsilon(1e-10));
  }
  // f / (1 - f) with beta = 3 is finite: E[F / (1 - F)] = alpha / (beta - 1)
  CHECK(d.integrate(Integrand::f_over_one_minus()) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(FitnessDistribution::beta(2.0, 1.0).integrate(Integrand::f_over_one_minus()) == kInfinity);
}

TEST_CASE("integrate: singular but integrable endpoint via quadrature") {
  // Beta(1, 1.5): f / (1 - f) integrable, E = alpha / (beta - 1) = 2
  const auto d = FitnessDistribution::beta(1.0, 1.5);
  CHECK(d.integrate(Integrand::f_over_one_minus(), {}, {1e-10, IntegrationMethod::Quadrature}) ==
        doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("exact path refuses integrands without a closed form") {
  CHECK_THROWS_AS(be_law().integrate(Integrand::gamma_k(1.5, 3), {}, {1e-10, IntegrationMethod::Exact}),
                  ContractViolation);
  CHECK_THROWS_AS(Integrand::gamma_k(1.5, 0).validate(), ContractViolation);
  CHECK_THROWS_AS(Integrand::f_over_theta_minus(0.5).validate(), ContractViolation);
}

TEST_CASE("property: indicator of (0, 1] has mass one") {
  gen::for_all(60, 1, [](gen::Rng& rng) {
    const auto d = gen::any(rng);
    CHECK(d.integrate(Integrand::one()) == doctest::Approx(1.0).epsilon(1e-10));
  });
}

TEST_CASE("property: window masses add up") {
  gen::for_all(40, 2, [](gen::Rng& rng) {
    const auto d = gen::any(rng);
    const double cut = gen::uniform(rng, 0.05, 0.95);
    const double left = d.integrate(Integrand::one(), Window{0.0, cut});
    const double right = d.integrate(Integrand::one(), Window{cut, 1.0});
    CHECK(left + right == doctest::Approx(1.0).epsilon(1e-10));
  });
}

TEST_CASE("property: exact and quadrature paths agree") {
  gen::for_all(40, 3, [](gen::Rng& rng) {
    const auto d = gen::index(rng, 0, 1) ? gen::discrete(rng) : gen::density(rng);
    const double theta = gen::uniform(rng, 1.01, 4.0);
    for (const auto& g : {Integrand::f_over_theta_minus(theta), Integrand::theta_over_theta_minus(theta),
                          Integrand::identity(), Integrand::one()}) {
      const double exact = d.integrate(g, {}, {1e-12, IntegrationMethod::Exact});
      const double quad = d.integrate(g, {}, {1e-12, IntegrationMethod::Quadrature});
      const bool is_discrete = std::holds_alternative<Discrete>(d.representation());
      CHECK(std::fabs(exact - quad) <= (is_discrete ? 1e-12 : 1e-9) * std::max(1.0, std::fabs(exact)));
    }
  });
}

TEST_CASE("property: integral of f / (theta - f) decreases in theta") {
  gen::for_all(40, 4, [](gen::Rng& rng) {
    const auto d = gen::any(rng);
    const double t1 = gen::uniform(rng, 1.001, 3.0);
    const double t2 = t1 + gen::uniform(rng, 0.01, 2.0);
    CHECK(d.integrate(Integrand::f_over_theta_minus(t1)) > d.integrate(Integrand::f_over_theta_minus(t2)));
  });
}

TEST_CASE("property: pushforward scales the mean by 1 / s") {
  gen::for_all(40, 5, [](gen::Rng& rng) {
    const double s = gen::uniform(rng, 0.2, 3.0);
    RawDistribution raw;
    double raw_mean = 0.0;
    if (gen::index(rng, 0, 1)) {
      const double v = gen::uniform(rng, 0.05, 0.95) * s;
      const double m = gen::uniform(rng, 0.1, 0.9);
      raw.rep = Discrete{{{v, m}, {s, 1.0 - m}}};
      raw_mean = v * m + s * (1.0 - m);
    } else {
      // linear density c0 + c1 x on [0, s], normalised
      const double c1 = gen::uniform(rng, 0.0, 2.0);
      const double c0 = gen::uniform(rng, 0.1, 2.0);
      const double mass = c0 * s + c1 * s * s / 2.0;
      raw.rep = PiecewiseDensity{{0.0, s}, {{c0 / mass, c1 / mass}}};
      raw_mean = (c0 * s * s / 2.0 + c1 * s * s * s / 3.0) / mass;
    }
    const auto d = normalize_esssup(raw);
    CHECK(d.integrate(Integrand::identity()) == doctest::Approx(raw_mean / s).epsilon(1e-10));
  });
}

TEST_CASE("property: samples stay in (0, 1] and follow the CDF") {
  gen::for_all(10, 6, [](gen::Rng& rng) {
    const auto d = gen::any(rng);
    RandomStream stream(rng());
    const double cut = gen::uniform(rng, 0.2, 0.8);
    const double p = d.integrate(Integrand::one(), Window{0.0, cut});
    constexpr int kDraws = 40000;
    int below = 0;
    for (int i = 0; i < kDraws; ++i) {
      const double f = d.sample(stream);
      REQUIRE(f > 0.0);
      REQUIRE(f <= 1.0);
      below += f <= cut;
    }
    const double se = std::sqrt(p * (1 - p) / kDraws);
    CHECK(std::fabs(static_cast<double>(below) / kDraws - p) <= 5 * se + 1e-9);
  });
}
