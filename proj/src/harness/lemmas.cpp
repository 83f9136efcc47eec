// SPDX-License-Identifier: Apache-2.0
#include "belab/harness/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "belab/arithmetic.hpp"
#include "belab/charfun.hpp"
#include "belab/format.hpp"
#include "belab/kolmogorov.hpp"
#include "belab/numeric.hpp"
#include "belab/parallel.hpp"
#include "belab/sphere.hpp"

namespace belab::harness {

namespace {

constexpr double kSlack = 1e-12;

enum CheckId : std::uint64_t {
  kMomentChain = 1,
  kCauchySchwarz,
  kRegimeR1,
  kSubadditivity,
  kSLipschitz,
  kCfBound,
  kPaleyZygmund,
  kTriangle,
  kLipschitz,
  kCll,
  kBessel,
  kSphereCf,
  kCertifier,
  kCoverage,
  kSqrt2,
  kEsseen,
};

std::size_t draw_index(CounterRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

double draw(CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

/// Minimum of per-trial slacks, trial i drawn from stream i of the check.
double worst_slack(std::uint64_t seed, CheckId id, std::size_t trials,
                   const std::function<double(CounterRng&)>& trial) {
  const CounterRng base(seed, id);
  std::vector<double> slack(trials);
  parallel_for(trials, [&](std::size_t i) {
    CounterRng rng = base.split(i);
    slack[i] = trial(rng);
  });
  return *std::min_element(slack.begin(), slack.end());
}

CheckResult at_least(std::string name, double metric, double threshold,
                     std::size_t trials, std::string detail) {
  return {std::move(name), metric >= threshold, metric, threshold, trials,
          std::move(detail)};
}

CheckResult above(std::string name, double metric, std::size_t trials,
                  std::string detail) {
  return {std::move(name), metric > 0.0, metric, 0.0, trials, std::move(detail)};
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
  std::vector<double> grid(points);
  const double ratio = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = lo * std::exp(ratio * static_cast<double>(i));
  }
  return grid;
}

CoefficientVector random_theta(CounterRng& rng, std::size_t lo, std::size_t hi) {
  return sample_direction(draw_index(rng, lo, hi), rng);
}

std::vector<MomentProfile> random_profiles(CounterRng& rng, std::size_t n) {
  std::vector<MomentProfile> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) out.push_back(moments(random_law(rng)));
  return out;
}

// Nonnegative law with unit mean.
DiscreteLaw random_unit_mean_law(CounterRng& rng) {
  const std::size_t k = draw_index(rng, 1, 6);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < k; ++i) {
    atoms.push_back({draw(rng, 0.0, 10.0), draw(rng, 0.05, 1.0)});
  }
  const auto law = DiscreteLaw::normalized(std::move(atoms));
  const double mean = law.mean();
  std::vector<Atom> scaled;
  for (const auto& a : law.atoms()) scaled.push_back({a.value / mean, a.weight});
  return DiscreteLaw::normalized(std::move(scaled));
}

}  // namespace

DiscreteLaw random_law(CounterRng& rng) {
  for (;;) {
    const std::size_t k = draw_index(rng, 2, 6);
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < k; ++i) {
      atoms.push_back({draw(rng, -3.0, 3.0), draw(rng, 0.05, 1.0)});
    }
    const auto raw = DiscreteLaw::normalized(std::move(atoms));
    if (raw.variance() > 1e-3) return standardize(raw);
  }
}

std::vector<CheckResult> run_lemma_checks(std::uint64_t seed, std::size_t trials) {
  std::vector<CheckResult> out;

  {
    const double slack = worst_slack(seed, kMomentChain, trials, [](CounterRng& rng) {
      const auto m = moments(random_law(rng));
      return std::min({m.gamma_bar() - std::abs(m.gamma()),
                       std::pow(m.delta(), 2.0 / 3.0) - m.gamma_bar(),
                       m.gamma_bar() - 1.0, m.delta() - 1.0});
    });
    out.push_back(at_least("moment_chain", slack, -kSlack, trials,
                           "min of the gaps in |g| <= g_bar <= delta^(2/3), g_bar >= 1, delta >= 1"));
  }
  {
    const double slack = worst_slack(seed, kCauchySchwarz, trials, [](CounterRng& rng) {
      const auto theta = random_theta(rng, 1, 40);
      const auto profiles = random_profiles(rng, theta.size());
      const auto stats = direction_stats(theta, profiles);
      return std::sqrt(stats.quartic_term) - std::abs(stats.skew_term);
    });
    out.push_back(at_least("r1_le_eps2", slack, -kSlack, trials,
                           "min of eps^2 - R1 over random directions and laws"));
  }
  {
    // The full regime report integrates, so it gets a smaller sample.
    const std::size_t count = std::min<std::size_t>(trials, 10);
    const double slack = worst_slack(seed, kRegimeR1, count, [](CounterRng& rng) {
      const auto theta = random_theta(rng, 2, 8);
      std::vector<DiscreteLaw> laws;
      for (std::size_t j = 0; j < theta.size(); ++j) laws.push_back(random_law(rng));
      const auto report = regime_report(theta, laws);
      return report.epsilon * report.epsilon - report.r1;
    });
    out.push_back(at_least("regime_report_r1_le_eps2", slack, -kSlack, count,
                           "min of eps^2 - R1 from regime_report"));
  }
  {
    const double slack = worst_slack(seed, kSubadditivity, trials, [](CounterRng& rng) {
      const auto theta = random_theta(rng, 1, 8);
      const auto y = symmetrize(random_law(rng));
      const double a = draw(rng, -20.0, 20.0);
      const double b = draw(rng, -20.0, 20.0);
      return s_function(theta, y, a) + s_function(theta, y, b) - s_function(theta, y, a + b);
    });
    out.push_back(at_least("s_subadditive", slack, -kSlack, trials,
                           "min of S(a) + S(b) - S(a + b)"));
  }
  {
    const double slack = worst_slack(seed, kSLipschitz, trials, [](CounterRng& rng) {
      const auto theta = random_theta(rng, 1, 8);
      const auto y = symmetrize(random_law(rng));
      const double a = draw(rng, -20.0, 20.0);
      const double b = a + draw(rng, -0.1, 0.1);
      const double lip = std::sqrt(y.variance()) / (2.0 * kPi);
      return lip * std::abs(a - b) - std::abs(s_function(theta, y, a) - s_function(theta, y, b));
    });
    out.push_back(at_least("s_lipschitz", slack, -kSlack, trials,
                           "min of sqrt(E Y^2)/(2 pi) |a - b| - |S(a) - S(b)|"));
  }
  {
    const double slack = worst_slack(seed, kCfBound, trials, [](CounterRng& rng) {
      const auto theta = random_theta(rng, 1, 8);
      const auto x = random_law(rng);
      const auto y = symmetrize(x);
      const double xi = draw(rng, -30.0, 30.0);
      const std::vector<DiscreteLaw> laws{x};
      const double s = s_function(theta, y, xi);
      return std::exp(-4.0 * s * s) - std::abs(product_charfun(theta, laws, xi));
    });
    out.push_back(at_least("charfun_le_exp_s", slack, -kSlack, trials,
                           "min of exp(-4 S^2) - |phi_theta| with Y the symmetrized law"));
  }
  {
    const double slack = worst_slack(seed, kPaleyZygmund, trials, [](CounterRng& rng) {
      const auto y = random_unit_mean_law(rng);
      CompensatedSum second;
      for (const auto& a : y.atoms()) second.add(a.weight * a.value * a.value);
      const double m = std::max(second.value(), 1.0) * draw(rng, 1.0, 3.0);
      const auto r = paley_zygmund_check(y, m);
      return (r.lower_tail && r.truncated_mean) ? 1.0 : 0.0;
    });
    out.push_back(at_least("paley_zygmund", slack, 1.0, trials,
                           "1 when both parts hold on every random unit-mean law"));
  }
  {
    const double slack = worst_slack(seed, kTriangle, trials, [](CounterRng& rng) {
      const std::size_t n = draw_index(rng, 1, 10);
      std::vector<double> x(n), y(n), s(n);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = draw(rng, -5.0, 5.0);
        y[j] = draw(rng, -5.0, 5.0);
        s[j] = x[j] + y[j];
      }
      return dist_to_lattice(x) + dist_to_lattice(y) - dist_to_lattice(s);
    });
    out.push_back(at_least("lattice_triangle", slack, -kSlack, trials,
                           "min of d(x) + d(y) - d(x + y)"));
  }
  {
    const double slack = worst_slack(seed, kLipschitz, trials, [](CounterRng& rng) {
      const auto theta = random_theta(rng, 1, 16);
      const double a = draw(rng, -50.0, 50.0);
      const double b = rng.uniform() < 0.5 ? a + draw(rng, -0.5, 0.5) : draw(rng, -50.0, 50.0);
      return std::abs(a - b) - std::abs(dist_to_lattice(theta, a) - dist_to_lattice(theta, b));
    });
    out.push_back(at_least("lattice_lipschitz", slack, -kSlack, trials,
                           "min of |a - b| - |d(a theta) - d(b theta)|"));
  }
  {
    struct Case {
      std::vector<BoundedFunction> fs;
      std::size_t n;
    };
    std::vector<Case> cases;
    for (double xi : {1.0, 3.0, 10.0}) {
      for (std::size_t n : {4u, 8u}) {
        const BoundedFunction f{[xi](double t) { return std::abs(std::cos(xi * t)); }, 1.0,
                                2.0 * xi};
        cases.push_back({{f}, n});
      }
    }
    {
      std::vector<BoundedFunction> fs;
      for (std::size_t j = 0; j < 6; ++j) {
        const double a = static_cast<double>(j + 1);
        fs.push_back({[a](double t) { return 0.5 * (1.0 + std::cos(a * t)); }, 1.0, a});
      }
      cases.push_back({fs, 6});
    }
    cases.push_back({{BoundedFunction{[](double t) { return t * t; }, 1.0, 1.0}}, 4});
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto r = cll_check(cases[c].fs, cases[c].n, 20'000, mix64(seed ^ (kCll << 32 | c)));
      worst = std::min(worst, r.rhs + 3.0 * r.radius - r.lhs);
    }
    out.push_back(at_least("cll_inequality", worst, 0.0, cases.size(),
                           "min of rhs + 3 sigma - lhs, m = 20000"));
  }
  {
    double worst = std::numeric_limits<double>::infinity();
    const std::vector<std::size_t> dims{2, 4, 8, 16, 32, 64};
    std::vector<double> fits(dims.size());
    parallel_for(dims.size(), [&](std::size_t i) {
      const auto grid = geometric_grid(1e-2, 10.0 * static_cast<double>(dims[i]), 60);
      fits[i] = bessel_decay_fit(dims[i], grid);
    });
    for (double c : fits) worst = std::min(worst, c);
    out.push_back(above("bessel_transform_fit", worst, dims.size(),
                        "min fitted c over n in {2,...,64}, 60-point grid up to 10n"));
  }
  {
    const std::vector<std::string> names{"rademacher", "threepoint(2,0.2)", "bernoulli(0.3)"};
    const std::vector<std::size_t> dims{8, 16, 32};
    std::vector<double> fits(names.size() * dims.size());
    parallel_for(fits.size(), [&](std::size_t i) {
      const auto law = parse_law_preset(names[i / dims.size()]);
      const std::size_t n = dims[i % dims.size()];
      const auto grid = geometric_grid(1e-2, 10.0 * std::sqrt(static_cast<double>(n)), 40);
      fits[i] = sphere_charfun_fit(law, n, grid);
    });
    out.push_back(above("sphere_charfun_fit", *std::min_element(fits.begin(), fits.end()),
                        fits.size(), "min fitted c over three laws and n in {8,16,32}"));
  }
  {
    const auto theta = theta_zero(8);
    const auto range = minimal_certified_r(theta, 1e-3);
    double slack = -1.0;
    std::string detail = "no certified R found";
    if (std::isfinite(range.r_upper)) {
      constexpr std::size_t kProbes = 100'000;
      slack = worst_slack(seed, kCertifier, kProbes, [&](CounterRng& rng) {
        const double xi = draw(rng, 0.0, 8.0);
        return dist_to_lattice(theta, xi) - condition_iii_rhs(8, range.r_upper, xi);
      });
      detail = "min of d - RHS over 1e5 random probes at R = " + format_double(range.r_upper);
    }
    out.push_back(at_least("certificate_sound", slack, -kSlack, 100'000, detail));
  }
  {
    std::size_t total = 0;
    std::size_t covered = 0;
    const std::vector<std::string> names{"rademacher", "threepoint(2,0.2)"};
    for (std::size_t n : {32u, 64u}) {
      for (std::size_t l = 0; l < names.size(); ++l) {
        const auto law = parse_law_preset(names[l]);
        const std::vector<MomentProfile> profiles{moments(law)};
        const double reference = 200.0 * std::sqrt(profiles[0].delta4) /
                                 std::sqrt(static_cast<double>(n));
        const CounterRng base(seed, kCoverage + 100 * n + l);
        std::vector<int> hit(trials);
        parallel_for(trials, [&](std::size_t i) {
          CounterRng rng = base.split(i);
          const auto theta = sample_direction(n, rng);
          hit[i] = minimal_r2(theta, profiles) <= reference ? 1 : 0;
        });
        total += trials;
        for (int h : hit) covered += static_cast<std::size_t>(h);
      }
    }
    const double fraction = static_cast<double>(covered) / static_cast<double>(total);
    out.push_back(at_least("r2_coverage", fraction, 0.99, total,
                           "fraction of sampled directions with R2_min <= 200 delta^2 / sqrt(n)"));
  }
  {
    const double c = sqrt2_diophantine_check(100.0, 1e-4);
    out.push_back(above("sqrt2_diophantine", c, 1, "fitted c on [1/2, 100], grid 1e-4"));
  }
  {
    const std::vector<std::string> names{"rademacher", "threepoint(2,0.2)", "bernoulli(0.3)"};
    std::vector<double> slack(names.size() * 2);
    parallel_for(slack.size(), [&](std::size_t i) {
      const std::vector<DiscreteLaw> laws{parse_law_preset(names[i / 2])};
      const auto theta = (i % 2 == 0) ? CoefficientVector::uniform(6) : theta_zero(8);
      const double exact = exact_distance(theta, laws[0]).value;
      const std::vector<double> cutoffs{5.0, 10.0, 20.0};
      slack[i] = esseen_bound_sweep(theta, laws, cutoffs) - exact;
    });
    out.push_back(at_least("esseen_sound", *std::min_element(slack.begin(), slack.end()),
                           -1e-8, slack.size(), "min of esseen_bound - exact distance"));
  }
  return out;
}

}  // namespace belab::harness
