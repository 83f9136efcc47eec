#include <cmath>
#include <sstream>
#include <vector>

#include "belab/laws.hpp"
#include "belab/numeric.hpp"
#include "belab/parallel.hpp"
#include "belab/rng.hpp"
#include "belab/sphere.hpp"
#include "doctest.h"

using namespace belab;
using doctest::Approx;

namespace {

// E cos(ξΘ₁) in closed form: Γ(n/2) (2/ξ)^ν J_ν(ξ) with ν = n/2 - 1.
double bessel_oracle(std::size_t n, double xi) {
  if (xi == 0.0) return 1.0;
  const double nu = 0.5 * static_cast<double>(n) - 1.0;
  const double a = std::abs(xi);
  return std::exp(std::lgamma(0.5 * static_cast<double>(n)) + nu * std::log(2.0 / a)) *
         std::cyl_bessel_j(nu, a);
}

}  // namespace

TEST_CASE("sample direction") {
  CounterRng base(3, 0);
  for (std::uint64_t i = 0; i < 200; ++i) {
    CounterRng rng = base.split(i);
    const std::size_t n = 1 + i % 70;
    const auto theta = sample_direction(n, rng);
    CompensatedSum sq;
    for (double x : theta.coords()) sq.add(x * x);
    CHECK(std::abs(sq.value() - 1.0) <= 1e-12);
    if (n == 1) CHECK(std::abs(theta[0]) == 1.0);
  }
  const auto a = sample_direction(12, 99);
  const auto b = sample_direction(12, 99);
  CHECK(a.digest() == b.digest());

  for (std::size_t n : {2u, 5u, 20u}) {
    constexpr int kSamples = 10'000;
    CompensatedSum m;
    CompensatedSum m2;
    for (int i = 0; i < kSamples; ++i) {
      CounterRng rng(17, static_cast<std::uint64_t>(i));
      const double t = sample_direction(n, rng)[0];
      m.add(t * t);
      m2.add(t * t * t * t);
    }
    const double mean = m.value() / kSamples;
    const double se = std::sqrt((m2.value() / kSamples - mean * mean) / kSamples);
    CHECK(std::abs(mean - 1.0 / double(n)) <= 3.0 * se);
  }
}

TEST_CASE("marginal density") {
  for (double t : {-0.9, -0.2, 0.0, 0.5, 0.99}) {
    CHECK(marginal_density(3, t) == Approx(0.5).epsilon(1e-14));
    CHECK(marginal_density(2, t) == Approx(1.0 / (kPi * std::sqrt(1 - t * t))).epsilon(1e-13));
  }
  CHECK(marginal_density(5, 1.5) == 0.0);
  CHECK_THROWS_AS(marginal_density(1, 0.0), PreconditionViolated);
  for (std::size_t n = 2; n <= 64; ++n) {
    const double mass = marginal_expectation(n, [](double) { return 1.0; }, 1.0);
    CHECK(std::abs(mass - 1.0) <= 1e-12);
  }
}

TEST_CASE("bessel transform against the closed form") {
  for (std::size_t n : {2u, 3u, 4u, 7u, 16u, 33u, 64u}) {
    CHECK(bessel_transform(n, 0.0) == Approx(1.0).epsilon(1e-14));
    for (double xi : {0.01, 0.5, 1.0, 3.7, 10.0, 41.0, 150.0}) {
      const double j = bessel_transform(n, xi);
      CHECK(std::abs(j - bessel_oracle(n, xi)) <= 1e-11);
      CHECK(std::abs(j) <= 1.0);
      CHECK(bessel_transform(n, -xi) == j);
    }
  }
  CHECK(std::abs(bessel_transform(3, kPi)) <= 1e-12);
  for (double xi : {0.3, 2.0, 8.0}) {
    CHECK(bessel_transform(3, xi) == Approx(std::sin(xi) / xi).epsilon(1e-12));
  }
}

TEST_CASE("bessel transform approaches the gaussian") {
  double previous = 1.0;
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    double sup = 0.0;
    for (double xi = -5.0; xi <= 5.0; xi += 0.05) {
      sup = std::max(sup, std::abs(bessel_transform(n, std::sqrt(double(n)) * xi) -
                                   std::exp(-0.5 * xi * xi)));
    }
    CHECK(sup < previous);
    previous = sup;
  }
}

TEST_CASE("bessel fit constant") {
  for (std::size_t n : {4u, 8u, 16u, 32u, 64u}) {
    std::vector<double> grid;
    for (double xi = 0.05; xi <= 10.0 * double(n); xi *= 1.1) grid.push_back(xi);
    const double c = bessel_decay_fit(n, grid);
    CHECK(c >= 0.01);
    CHECK(c <= 1.0);
    const std::vector<double> tiny{1e-3};
    CHECK(bessel_decay_fit(n, tiny) == Approx(0.5).epsilon(1e-3));
  }
  CHECK_THROWS_AS(bessel_decay_fit(8, std::vector<double>{}), PreconditionViolated);
  CHECK_THROWS_AS(bessel_decay_fit(8, std::vector<double>{0.0}), PreconditionViolated);
}

TEST_CASE("expected squared charfun") {
  const auto r = DiscreteLaw::rademacher();
  for (double tau : {0.3, 1.0, 4.0, 12.0}) {
    const double direct = expected_sq_charfun(r, 8, tau);
    CHECK(direct == Approx(0.5 * (1.0 + bessel_transform(8, 2.0 * tau))).epsilon(1e-11));
  }
  CHECK(expected_sq_charfun(r, 8, 0.0) == Approx(1.0).epsilon(1e-13));

  // Plancherel: E|φ(τΘ)|² = E J_n(τY) over the symmetrized law.
  for (const char* name : {"bernoulli(0.3)", "threepoint(2,0.2)"}) {
    const auto law = parse_law_preset(name);
    const auto sym = symmetrize(law);
    for (std::size_t n : {4u, 11u}) {
      for (double tau : {0.7, 3.0, 9.0}) {
        CompensatedSum via_y;
        for (const auto& a : sym.atoms()) via_y.add(a.weight * bessel_oracle(n, tau * a.value));
        CHECK(std::abs(expected_sq_charfun(law, n, tau) - via_y.value()) <= 1e-11);
      }
    }
  }
}

TEST_CASE("sphere charfun fit constant") {
  for (const char* name : {"rademacher", "threepoint(2,0.2)"}) {
    const auto law = parse_law_preset(name);
    for (std::size_t n : {8u, 16u, 32u}) {
      std::vector<double> grid{0.0};
      for (double tau = 0.05; tau <= 10.0 * std::sqrt(double(n)); tau *= 1.15) grid.push_back(tau);
      CHECK(sphere_charfun_fit(law, n, grid) > 0.0);
    }
  }
  CHECK_THROWS_AS(sphere_charfun_fit(DiscreteLaw::rademacher(), 8, std::vector<double>{0.0}),
                  PreconditionViolated);
}

TEST_CASE("CLL inequality") {
  const std::vector<BoundedFunction> ones{{[](double) { return 1.0; }, 1.0, 1.0}};
  const auto flat = cll_check(ones, 6, 10'000, 1);
  CHECK(flat.lhs == Approx(1.0));
  CHECK(flat.rhs == Approx(1.0).epsilon(1e-12));
  CHECK(flat.radius == Approx(0.0));

  const std::vector<BoundedFunction> single{{[](double t) { return 1.0 + 0.5 * t; }, 2.0, 1.0}};
  const auto cs = cll_check(single, 1, 10'000, 2);
  CHECK(cs.lhs <= cs.rhs + 3 * cs.radius);
  CHECK(cs.rhs == Approx(std::sqrt(0.5 * (0.5 * 0.5 + 1.5 * 1.5))));

  for (double xi : {1.0, 4.0}) {
    const std::vector<BoundedFunction> f{
        {[xi](double t) { return std::abs(std::cos(xi * t)); }, 1.0, 2 * xi}};
    for (std::size_t n : {3u, 8u}) {
      const auto res = cll_check(f, n, 20'000, 7);
      CHECK(res.lhs <= res.rhs + 3 * res.radius);
    }
  }

  const std::vector<BoundedFunction> bad{{[](double t) { return t; }, 1.0, 1.0}};
  CHECK_THROWS_AS(cll_check(bad, 4, 10'000, 1), PreconditionViolated);
  CHECK_THROWS_AS(cll_check(ones, 4, 9'999, 1), PreconditionViolated);
  CHECK_THROWS_AS(cll_check(std::vector<BoundedFunction>(3, ones[0]), 4, 10'000, 1),
                  PreconditionViolated);
}

TEST_CASE("property: direction statistics") {
  const std::vector<MomentProfile> profiles{moments(parse_law_preset("threepoint(2,0.2)")),
                                            moments(DiscreteLaw::rademacher()),
                                            moments(parse_law_preset("bernoulli(0.1)"))};
  CounterRng base(8, 0);
  for (std::uint64_t i = 0; i < 500; ++i) {
    CounterRng rng = base.split(i);
    const auto theta = sample_direction(3, rng);
    const auto s = direction_stats(theta, profiles);
    CHECK(std::abs(s.skew_term) <= std::sqrt(s.quartic_term) + 1e-12);
    CHECK(s.quartic_term <= double(s.n) * s.delta4_mean);
  }
}

TEST_CASE("deviation tail curves") {
  const std::vector<MomentProfile> sym{moments(DiscreteLaw::rademacher())};
  const auto table = deviation_tail_curves(sym, 32, 10'000, 5);
  REQUIRE(table.t.size() == table.survival_skew.size());
  for (std::size_t k = 1; k < table.t.size(); ++k) CHECK(table.survival_skew[k] == 0.0);
  for (std::size_t k = 0; k < table.t.size(); ++k) {
    if (table.t[k] <= 1.0) CHECK(table.survival_quartic[k] == 1.0);
    if (k > 0) CHECK(table.survival_quartic[k] <= table.survival_quartic[k - 1]);
  }

  std::vector<double> slopes;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto t = deviation_tail_curves(sym, 32, 100'000, seed);
    CHECK(t.quartic_fit.slope > 0.0);
    slopes.push_back(t.quartic_fit.slope);
  }
  const auto [lo, hi] = std::minmax_element(slopes.begin(), slopes.end());
  CHECK(*hi <= 1.2 * *lo);

  set_thread_count(4);
  const auto threaded = deviation_tail_curves(sym, 16, 20'000, 9);
  set_thread_count(1);
  const auto serial = deviation_tail_curves(sym, 16, 20'000, 9);
  CHECK(threaded.survival_quartic == serial.survival_quartic);

  std::ostringstream out;
  write_tail_csv(out, serial);
  CHECK(out.str().rfind("t,survival_skew,survival_quartic\n", 0) == 0);
  CHECK_THROWS_AS(deviation_tail_curves(sym, 8, 9'999, 1), PreconditionViolated);
}
