// SPDX-License-Identifier: Apache-2.0
#include "belab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "belab/errors.hpp"
#include "belab/format.hpp"
#include "belab/numeric.hpp"
#include "belab/parallel.hpp"

namespace belab {

namespace {

constexpr std::size_t kSampleChunk = 1024;

double log_marginal_constant(std::size_t n) {
  const double nd = static_cast<double>(n);
  return std::lgamma(0.5 * nd) - std::lgamma(0.5 * (nd - 1.0)) -
         0.5 * std::log(kPi);
}

void require_dimension(std::size_t n) {
  if (n < 2) throw PreconditionViolated("marginal of S^{n-1} needs n >= 2");
}

TailFit fit_tail(std::span<const double> t, std::span<const double> survival,
                 std::size_t samples, double t_min, double exponent) {
  const double floor = 10.0 / static_cast<double>(samples);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_min || survival[k] < floor) continue;
    xs.push_back(std::pow(t[k], exponent));
    ys.push_back(-std::log(survival[k]));
  }
  TailFit fit;
  fit.points = xs.size();
  if (xs.size() < 2) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = fit.slope;
    fit.r_squared = fit.slope;
    return fit;
  }
  const auto ls = least_squares(xs, ys);
  fit.slope = ls.slope;
  fit.intercept = ls.intercept;
  fit.r_squared = ls.r_squared;
  return fit;
}

std::vector<double> survival_curve(std::vector<double> stats,
                                   std::span<const double> t) {
  std::sort(stats.begin(), stats.end());
  const double inv = 1.0 / static_cast<double>(stats.size());
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto it = std::lower_bound(stats.begin(), stats.end(), t[k]);
    out[k] = static_cast<double>(stats.end() - it) * inv;
  }
  return out;
}

}  // namespace

CoefficientVector sample_direction(std::size_t n, CounterRng& rng) {
  if (n == 0) throw PreconditionViolated("dimension must be positive");
  std::vector<double> g(n);
  for (;;) {
    for (double& x : g) x = rng.normal();
    double norm2 = 0.0;
    for (double x : g) norm2 += x * x;
    if (norm2 > 0.0) break;
  }
  return CoefficientVector::normalized(std::move(g));
}

CoefficientVector sample_direction(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  return sample_direction(n, rng);
}

double marginal_density(std::size_t n, double t) {
  require_dimension(n);
  if (!(std::abs(t) < 1.0)) {
    if (std::abs(t) == 1.0 && n == 2) return std::numeric_limits<double>::infinity();
    if (std::abs(t) == 1.0 && n == 3) return 0.5;
    return 0.0;
  }
  const double exponent = 0.5 * (static_cast<double>(n) - 3.0);
  return std::exp(log_marginal_constant(n) + exponent * std::log1p(-t * t));
}

double marginal_expectation(std::size_t n, const std::function<double(double)>& g,
                            double max_frequency, double abs_tol) {
  require_dimension(n);
  const double log_c = log_marginal_constant(n);
  const double power = static_cast<double>(n) - 2.0;
  auto integrand = [&](double u) {
    const double cu = std::cos(u);
    const double weight = power == 0.0 ? 1.0 : std::pow(cu, power);
    return g(std::sin(u)) * std::exp(log_c) * weight;
  };
  QuadratureOptions opts;
  opts.abs_tol = abs_tol;
  opts.max_panel_width = 0.5 * kPi / std::max(max_frequency, 1.0);
  return integrate(integrand, -0.5 * kPi, 0.5 * kPi, opts).value;
}

double bessel_transform(std::size_t n, double xi) {
  require_dimension(n);
  if (xi == 0.0) return 1.0;
  // Even integrand: integrate over u in [0, π/2] and double.
  const double log_c = log_marginal_constant(n);
  const double power = static_cast<double>(n) - 2.0;
  auto integrand = [&](double u) {
    const double weight = power == 0.0 ? 1.0 : std::pow(std::cos(u), power);
    return std::cos(xi * std::sin(u)) * weight;
  };
  QuadratureOptions opts;
  opts.abs_tol = 0.5e-12 / std::exp(log_c);
  opts.max_panel_width = 0.5 * kPi / std::max(std::abs(xi), 1.0);
  return 2.0 * std::exp(log_c) * integrate(integrand, 0.0, 0.5 * kPi, opts).value;
}

double bessel_decay_fit(std::size_t n, std::span<const double> xi_grid) {
  require_dimension(n);
  if (xi_grid.empty()) throw PreconditionViolated("empty xi grid");
  double c = std::numeric_limits<double>::infinity();
  for (double xi : xi_grid) {
    if (xi == 0.0) throw PreconditionViolated("xi grid must exclude 0");
    const double scale = std::min(xi * xi / static_cast<double>(n), 1.0);
    c = std::min(c, (1.0 - bessel_transform(n, xi)) / scale);
  }
  return c;
}

double expected_sq_charfun(const DiscreteLaw& law, std::size_t n, double tau) {
  double vmax = 0.0;
  for (const auto& a : law.atoms()) vmax = std::max(vmax, std::abs(a.value));
  auto g = [&](double t) { return std::norm(charfun(law, tau * t)); };
  return marginal_expectation(n, g, 2.0 * vmax * std::abs(tau));
}

double sphere_charfun_fit(const DiscreteLaw& law, std::size_t n,
                          std::span<const double> tau_grid) {
  require_dimension(n);
  const double delta4 = moments(law).delta4;
  double c = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double tau : tau_grid) {
    if (tau == 0.0) continue;
    any = true;
    const double scale = std::min(tau * tau / static_cast<double>(n), 1.0 / delta4);
    c = std::min(c, (1.0 - expected_sq_charfun(law, n, tau)) / scale);
  }
  if (!any) throw PreconditionViolated("tau grid has no nonzero entries");
  return c;
}

CllResult cll_check(std::span<const BoundedFunction> fs, std::size_t n,
                    std::size_t m, std::uint64_t seed) {
  if (fs.size() != 1 && fs.size() != n) {
    throw PreconditionViolated("expected 1 or n functions");
  }
  if (m < 10'000) throw PreconditionViolated("cll_check needs m >= 10^4");
  auto fn = [&](std::size_t j) -> const BoundedFunction& {
    return fs[fs.size() == 1 ? 0 : j];
  };

  const std::size_t chunks = (m + kSampleChunk - 1) / kSampleChunk;
  std::vector<double> sums(chunks);
  std::vector<double> squares(chunks);
  std::vector<int> violations(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    CompensatedSum s;
    CompensatedSum s2;
    const std::size_t lo = c * kSampleChunk;
    const std::size_t hi = std::min(m, lo + kSampleChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, i);
      const auto theta = sample_direction(n, rng);
      double prod = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = fn(j).f(theta[j]);
        if (!(v >= 0.0 && v <= fn(j).bound)) violations[c] = 1;
        prod *= v;
      }
      s.add(prod);
      s2.add(prod * prod);
    }
    sums[c] = s.value();
    squares[c] = s2.value();
  });
  if (std::any_of(violations.begin(), violations.end(), [](int v) { return v; })) {
    throw PreconditionViolated("function value outside [0, bound]");
  }
  const double md = static_cast<double>(m);
  const double mean = compensated_sum(sums) / md;
  const double var = std::max(compensated_sum(squares) / md - mean * mean, 0.0);

  double rhs = 1.0;
  if (n == 1) {
    // S^0 = {-1, +1} with equal mass.
    const auto& f = fn(0).f;
    rhs = std::sqrt(0.5 * (f(-1.0) * f(-1.0) + f(1.0) * f(1.0)));
  } else {
    auto root_second_moment = [&](const BoundedFunction& f) {
      const double second = marginal_expectation(
          n, [&](double t) { const double v = f.f(t); return v * v; },
          f.max_frequency);
      return std::sqrt(std::max(second, 0.0));
    };
    if (fs.size() == 1) {
      rhs = std::pow(root_second_moment(fs[0]), static_cast<double>(n));
    } else {
      for (const auto& f : fs) rhs *= root_second_moment(f);
    }
  }
  return {mean, rhs, std::sqrt(var / md)};
}

DirectionStats direction_stats(const CoefficientVector& theta,
                               std::span<const MomentProfile> profiles) {
  const std::size_t n = theta.size();
  if (profiles.size() != 1 && profiles.size() != n) {
    throw PreconditionViolated("expected 1 or n moment profiles");
  }
  CompensatedSum skew;
  CompensatedSum quartic;
  CompensatedSum delta4;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& p = profiles[profiles.size() == 1 ? 0 : j];
    const double t2 = theta[j] * theta[j];
    skew.add(p.gamma3 * t2 * theta[j]);
    quartic.add(p.delta4 * t2 * t2);
    delta4.add(p.delta4);
  }
  return {skew.value(), quartic.value(), n, delta4.value() / static_cast<double>(n)};
}

TailTable deviation_tail_curves(std::span<const MomentProfile> profiles,
                                std::size_t n, std::size_t samples,
                                std::uint64_t seed, const TailOptions& opts) {
  if (samples < 10'000) throw PreconditionViolated("tail curves need >= 10^4 samples");
  if (!(opts.t_step > 0.0)) throw PreconditionViolated("t_step must be positive");
  std::vector<double> skew(samples);
  std::vector<double> quartic(samples);
  const std::size_t chunks = (samples + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kSampleChunk;
    const std::size_t hi = std::min(samples, lo + kSampleChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, i);
      const auto stats = direction_stats(sample_direction(n, rng), profiles);
      const double scale = static_cast<double>(n) / stats.delta4_mean;
      skew[i] = scale * std::abs(stats.skew_term);
      quartic[i] = scale * stats.quartic_term;
    }
  });

  const double top = std::max(*std::max_element(skew.begin(), skew.end()),
                              *std::max_element(quartic.begin(), quartic.end()));
  TailTable table;
  table.samples = samples;
  table.fit_t_min = opts.fit_t_min;
  const auto steps = static_cast<std::size_t>(std::ceil(top / opts.t_step));
  for (std::size_t k = 0; k <= steps; ++k) {
    table.t.push_back(static_cast<double>(k) * opts.t_step);
  }
  table.survival_skew = survival_curve(std::move(skew), table.t);
  table.survival_quartic = survival_curve(std::move(quartic), table.t);
  table.skew_fit = fit_tail(table.t, table.survival_skew, samples, opts.fit_t_min, 2.0 / 3.0);
  table.quartic_fit =
      fit_tail(table.t, table.survival_quartic, samples, opts.fit_t_min, 0.5);
  return table;
}

void write_tail_csv(std::ostream& out, const TailTable& table) {
  out << "t,survival_skew,survival_quartic\n";
  for (std::size_t k = 0; k < table.t.size(); ++k) {
    out << format_double(table.t[k]) << ',' << format_double(table.survival_skew[k])
        << ',' << format_double(table.survival_quartic[k]) << '\n';
  }
  auto fit_line = [&](const char* name, const TailFit& fit, const char* axis) {
    out << "# fit " << name << " axis=" << axis
        << " slope=" << format_double(fit.slope)
        << " intercept=" << format_double(fit.intercept)
        << " r_squared=" << format_double(fit.r_squared)
        << " points=" << fit.points << '\n';
  };
  fit_line("skew", table.skew_fit, "t^(2/3)");
  fit_line("quartic", table.quartic_fit, "t^(1/2)");
}

}  // namespace belab
