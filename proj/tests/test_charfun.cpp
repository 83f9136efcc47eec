#include <cmath>
#include <complex>
#include <vector>

#include "belab/arithmetic.hpp"
#include "belab/charfun.hpp"
#include "belab/harness/lemmas.hpp"
#include "belab/kolmogorov.hpp"
#include "belab/laws.hpp"
#include "belab/numeric.hpp"
#include "belab/rng.hpp"
#include "belab/sphere.hpp"
#include "doctest.h"

using namespace belab;
using doctest::Approx;

namespace {

const std::vector<DiscreteLaw> kRademacher{DiscreteLaw::rademacher()};

}  // namespace

TEST_CASE("product charfun reference values") {
  for (double xi : {-4.0, -1.0, 0.3, 2.0, 9.0}) {
    const auto a = product_charfun(CoefficientVector::basis(6, 0), kRademacher, xi);
    CHECK(a.real() == Approx(std::cos(xi)).epsilon(1e-15));
    const auto b = product_charfun(CoefficientVector::uniform(2), kRademacher, xi);
    const double c = std::cos(xi / std::sqrt(2.0));
    CHECK(b.real() == Approx(c * c).epsilon(1e-14));
  }
  CHECK(product_charfun(theta_zero(8), kRademacher, 0.0) == std::complex<double>(1.0, 0.0));
  CHECK_THROWS_AS(product_charfun(CoefficientVector::uniform(3),
                                  std::vector<DiscreteLaw>(2, DiscreteLaw::rademacher()), 1.0),
                  PreconditionViolated);
}

TEST_CASE("regime report reference values") {
  for (std::size_t n : {4u, 9u, 16u}) {
    const auto rep = regime_report(CoefficientVector::uniform(n), kRademacher);
    CHECK(rep.epsilon == Approx(std::pow(double(n), -0.25)).epsilon(1e-14));
    CHECK(std::abs(rep.r1) < 1e-15);
    CHECK(rep.r2_reference == Approx(200.0 / std::sqrt(double(n))));
    CHECK(rep.boundaries[0] == 0.0);
    CHECK(rep.boundaries[3] == Approx(double(n)));
  }
  const std::vector<DiscreteLaw> bern{parse_law_preset("bernoulli(0.25)")};
  for (std::size_t n : {4u, 10u}) {
    const auto rep = regime_report(CoefficientVector::uniform(n), bern);
    CHECK(rep.r1 == Approx(2.0 / std::sqrt(3.0) / std::sqrt(double(n))).epsilon(1e-13));
  }
  const std::vector<DiscreteLaw> sym{parse_law_preset("threepoint(1,0.2)")};
  CHECK(std::abs(regime_report(theta_zero(8), sym).r1) < 1e-15);

  const auto j = to_json(regime_report(CoefficientVector::uniform(4), kRademacher));
  for (const char* key : {"epsilon", "r1", "r2_min", "r2_reference", "boundaries",
                          "segment_integrals"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("minimal R2 takes the cheapest coordinates first") {
  // Uniform coefficients with equal profiles: every threshold is the same.
  const std::vector<MomentProfile> r{moments(DiscreteLaw::rademacher())};
  CHECK(minimal_r2(CoefficientVector::uniform(16), r) == Approx(0.25));
  // Mass 1/2 at |θ| = 1/2 (threshold 1/2) already exceeds 1/8.
  const auto theta = CoefficientVector::from_unit({0.5, 0.5, 0.5, 0.5});
  CHECK(minimal_r2(theta, r) == Approx(0.5));
}

TEST_CASE("esseen bound reference values") {
  const double pair = esseen_bound(CoefficientVector::uniform(2), kRademacher, 10.0);
  CHECK(pair >= 0.25);
  const double single = esseen_bound(CoefficientVector::basis(1, 0), kRademacher, 10.0);
  CHECK(single >= 0.3413447460685429);
  const std::vector<double> cutoffs{2.0, 5.0, 10.0, 20.0};
  const double sweep = esseen_bound_sweep(theta_zero(8), kRademacher, cutoffs);
  for (double T : cutoffs) CHECK(sweep <= esseen_bound(theta_zero(8), kRademacher, T));
  CHECK_THROWS_AS(esseen_bound(theta_zero(8), kRademacher, 0.0), PreconditionViolated);
}

TEST_CASE("gaussian fixed point leaves only the remainder term") {
  SmoothingTarget gauss;
  gauss.cf = [](double xi) { return std::complex<double>(std::exp(-0.5 * xi * xi), 0.0); };
  gauss.max_frequency = 1.0;
  gauss.third_moment_bound = 0.0;
  const EsseenConstants k;
  for (double T : {1.0, 5.0, 40.0}) {
    CHECK(esseen_bound(gauss, T) == Approx(k.remainder / T).epsilon(1e-15));
  }
  CHECK(k.leading == Approx(1.0 / kPi).epsilon(1e-15));
  CHECK(k.remainder == Approx(24.0 / (kPi * std::sqrt(2.0 * kPi))).epsilon(1e-15));
}

TEST_CASE("smoothing integral is additive over a split point") {
  const auto target = smoothing_target(theta_zero(8), kRademacher);
  const double whole = smoothing_integral(target, 0.0, 12.0);
  const double parts = smoothing_integral(target, 0.0, 4.0) + smoothing_integral(target, 4.0, 12.0);
  CHECK(whole == Approx(parts).epsilon(1e-9));
  CHECK_THROWS_AS(smoothing_integral(target, 2.0, 1.0), PreconditionViolated);
}

TEST_CASE("property: soundness, |phi| <= 1, r1 <= eps^2") {
  CounterRng base(404, 0);
  for (std::uint64_t i = 0; i < 25; ++i) {
    CounterRng rng = base.split(i);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    const auto theta = sample_direction(n, rng);
    const std::vector<DiscreteLaw> laws{harness::random_law(rng)};
    const double exact = exact_distance(theta, laws[0]).value;
    const double bound = esseen_bound(theta, laws, 5.0 + 20.0 * rng.uniform());
    CHECK(bound >= exact - 1e-8);

    for (int k = 0; k < 10; ++k) {
      const double xi = 50.0 * (rng.uniform() - 0.5);
      CHECK(std::abs(product_charfun(theta, laws, xi)) <= 1.0 + 1e-15);
    }

    std::vector<DiscreteLaw> per;
    for (std::size_t j = 0; j < n; ++j) per.push_back(harness::random_law(rng));
    const auto rep = regime_report(theta, per);
    CHECK(rep.r1 <= rep.epsilon * rep.epsilon + 1e-12);
    double delta_min = 1e300;
    for (const auto& law : per) delta_min = std::min(delta_min, moments(law).delta());
    CHECK(rep.epsilon >= std::pow(double(n), -0.25) * delta_min - 1e-12);
    CHECK(rep.epsilon > 0.0);
  }
}
