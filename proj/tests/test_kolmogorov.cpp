#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "belab/arithmetic.hpp"
#include "belab/kolmogorov.hpp"
#include "belab/laws.hpp"
#include "belab/numeric.hpp"
#include "belab/parallel.hpp"
#include "belab/rng.hpp"
#include "belab/sphere.hpp"
#include "doctest.h"

using namespace belab;
using doctest::Approx;

namespace {

// Independent oracle: all 2^n sign patterns, sorted, scanned against Φ
// computed from erfc directly.
double brute_force_rademacher(const CoefficientVector& theta) {
  const std::size_t n = theta.size();
  std::vector<double> sums;
  sums.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += ((mask >> j) & 1) ? theta[j] : -theta[j];
    sums.push_back(s);
  }
  std::sort(sums.begin(), sums.end());
  const double p = 1.0 / static_cast<double>(sums.size());
  double best = 0.0;
  std::size_t i = 0;
  while (i < sums.size()) {
    std::size_t k = i;
    while (k < sums.size() && sums[k] - sums[i] <= 1e-12) ++k;
    const double phi = 0.5 * std::erfc(-sums[i] / std::sqrt(2.0));
    best = std::max({best, std::abs(p * i - phi), std::abs(p * k - phi)});
    i = k;
  }
  return best;
}

double binomial_closed_form(unsigned n) {
  // (1/2)·2^{-n}·C(n, n/2), exact in integers for n <= 60.
  std::uint64_t c = 1;
  for (unsigned k = 1; k <= n / 2; ++k) c = c * (n / 2 + k) / k;
  return 0.5 * static_cast<double>(c) / std::ldexp(1.0, static_cast<int>(n));
}

}  // namespace

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  // High-precision reference value of Φ(1).
  CHECK(std::abs(normal_cdf(1.0) - 0.84134474606854294858523) <= 2e-16);
  CHECK(std::abs(normal_cdf(-1.96) - 0.024997895148220435) <= 1e-16);
  for (double t = -8.0; t <= 8.0; t += 0.37) {
    CHECK(std::abs(normal_cdf(-t) - (1.0 - normal_cdf(t))) <= 1e-15);
  }
}

TEST_CASE("weighted sum laws") {
  const auto r = DiscreteLaw::rademacher();
  const auto two = weighted_sum_law(CoefficientVector::uniform(2), r);
  REQUIRE(two.size() == 3);
  CHECK(two.atoms()[0].value == Approx(-std::sqrt(2.0)));
  CHECK(two.atoms()[1].value == Approx(0.0));
  CHECK(two.atoms()[1].weight == Approx(0.5));
  CHECK(two.atoms()[2].weight == Approx(0.25));

  const auto drop = weighted_sum_law(CoefficientVector::basis(2, 0), r);
  CHECK(drop.size() == 2);
  CHECK(drop.atoms()[0].value == -1.0);

  const auto t4 = weighted_sum_law(theta_zero(4), r);
  // ±1 and ±√2 each appear twice, so sums collide: a·1 + b·√2 with a, b ∈ {-2, 0, 2}.
  CHECK(t4.size() == 9);
  CHECK(t4.atoms()[4].value == Approx(0.0));
  CHECK(t4.atoms()[4].weight == Approx(0.25));
  CHECK(std::abs(t4.mean()) < 1e-14);
  CHECK(t4.variance() == Approx(1.0).epsilon(1e-14));

  try {
    weighted_sum_law(CoefficientVector::uniform(30), r, 1 << 20);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.required() == std::ldexp(1.0, 30));
  }
}

TEST_CASE("exact distance reference values") {
  const auto r = DiscreteLaw::rademacher();
  const auto one = exact_distance(CoefficientVector::basis(1, 0), r);
  CHECK(one.value == Approx(0.8413447460685429 - 0.5).epsilon(1e-14));
  CHECK(one.method == DistanceMethod::kExact);
  CHECK(one.confidence_radius == 0.0);
  CHECK(one.interval_bound() == 2.0 * one.value);
  CHECK(exact_distance(CoefficientVector::uniform(2), r).value == Approx(0.25).epsilon(1e-15));
  CHECK(exact_distance(CoefficientVector::uniform(16), r).value ==
        Approx(0.09819).epsilon(1e-4));
}

TEST_CASE("uniform Rademacher sums match the binomial closed form") {
  const auto r = DiscreteLaw::rademacher();
  for (unsigned n = 2; n <= 24; n += 2) {
    const double exact = exact_distance(CoefficientVector::uniform(n), r).value;
    CHECK(std::abs(exact - binomial_closed_form(n)) <= 1e-10);
  }
  const double at24 = binomial_closed_form(24);
  const double asymptotic = 0.5 / std::sqrt(kPi * 24 / 2.0);
  CHECK(std::abs(at24 / asymptotic - 1.0) <= 0.05);
}

TEST_CASE("exact enumeration agrees with brute force on random directions") {
  CounterRng base(11, 0);
  for (std::uint64_t i = 0; i < 40; ++i) {
    CounterRng rng = base.split(i);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 12);
    const auto theta = sample_direction(n, rng);
    CHECK(exact_distance(theta, DiscreteLaw::rademacher()).value ==
          Approx(brute_force_rademacher(theta)).epsilon(1e-10));
  }
}

TEST_CASE("property: symmetry invariance and standardized output") {
  const auto law = parse_law_preset("threepoint(1,0.3)");
  REQUIRE(law.is_symmetric());
  CounterRng base(12, 0);
  for (std::uint64_t i = 0; i < 30; ++i) {
    CounterRng rng = base.split(i);
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 7);
    const auto theta = sample_direction(n, rng);
    std::vector<double> flipped(theta.coords().rbegin(), theta.coords().rend());
    for (std::size_t j = 0; j < n; j += 2) flipped[j] = -flipped[j];
    const auto other = CoefficientVector::normalized(flipped);
    CHECK(exact_distance(theta, law).value ==
          Approx(exact_distance(other, law).value).epsilon(1e-12));

    const auto sum = weighted_sum_law(theta, parse_law_preset("bernoulli(0.3)"));
    CHECK(std::abs(sum.mean()) <= 1e-10);
    CHECK(std::abs(sum.variance() - 1.0) <= 1e-10);
  }
}

TEST_CASE("balanced coefficients beat uniform ones") {
  const auto r = DiscreteLaw::rademacher();
  for (std::size_t n : {8u, 12u, 16u, 20u, 24u}) {
    CHECK(exact_distance(theta_zero(n), r).value <
          exact_distance(CoefficientVector::uniform(n), r).value);
  }
}

TEST_CASE("monte carlo estimator") {
  const auto point = mc_distance(CoefficientVector::uniform(3), DiscreteLaw::point_mass(0.0),
                                 5000, 0.05, 3);
  CHECK(point.value == 0.5);

  const auto theta = CoefficientVector::uniform(2);
  const auto r = DiscreteLaw::rademacher();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto est = mc_distance(theta, r, 100'000, 0.01, seed);
    CHECK(est.method == DistanceMethod::kMonteCarlo);
    CHECK(est.confidence_radius == Approx(std::sqrt(std::log(200.0) / 2e5)));
    CHECK(std::abs(est.value - 0.25) <= est.confidence_radius);
    CHECK(est.sample_count == 100'000);
    CHECK(est.seed == seed);
  }
  CHECK_THROWS_AS(mc_distance(theta, r, 999, 0.05, 1), PreconditionViolated);

  set_thread_count(1);
  const double serial = mc_distance(theta_zero(8), r, 50'000, 0.05, 9).value;
  set_thread_count(8);
  const double threaded = mc_distance(theta_zero(8), r, 50'000, 0.05, 9).value;
  set_thread_count(1);
  CHECK(serial == threaded);

  const auto j = to_json(mc_distance(theta, r, 2000, 0.05, 4));
  CHECK(j["method"] == "monte_carlo");
  CHECK(j.contains("confidence_radius"));
}

TEST_CASE("classical Berry-Esseen reference values") {
  CHECK(classical_be_bound(moments(DiscreteLaw::rademacher()), 100) == Approx(0.056));
  CHECK(classical_be_bound(moments(DiscreteLaw::rademacher()), 400) == Approx(0.028));
  const auto tp = DiscreteLaw::from_atoms({{-std::sqrt(2.0), 0.25}, {0.0, 0.5}, {std::sqrt(2.0), 0.25}});
  CHECK(classical_be_bound(moments(tp), 100) == Approx(0.0792).epsilon(1e-3));
  CHECK(classical_be_bound(moments(tp), CoefficientVector::uniform(100)) ==
        Approx(classical_be_bound(moments(tp), 100)).epsilon(1e-13));
  CHECK(dkw_radius(10'000, 0.05) == Approx(std::sqrt(std::log(40.0) / 20'000)));
}

TEST_CASE("cdf csv") {
  std::ostringstream out;
  write_cdf_csv(out, weighted_sum_law(CoefficientVector::uniform(2), DiscreteLaw::rademacher()));
  const auto s = out.str();
  CHECK(s.rfind("t,F,Phi,gap\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}
