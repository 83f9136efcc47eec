// SPDX-License-Identifier: Apache-2.0
#include "belab/charfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "belab/errors.hpp"
#include "belab/numeric.hpp"

namespace belab {

namespace {

constexpr double kNearZeroCutoff = 1e-3;
// E|G|³ for a standard Gaussian G.
constexpr double kGaussAbsThird = 1.5957691216057307;

}  // namespace

CoordinateLaws::CoordinateLaws(std::span<const DiscreteLaw> laws, std::size_t n)
    : laws_(laws), n_(n) {
  if (laws.size() != 1 && laws.size() != n) {
    throw PreconditionViolated("expected 1 or " + std::to_string(n) +
                               " laws, got " + std::to_string(laws.size()));
  }
}

std::complex<double> product_charfun(const CoefficientVector& theta,
                                     std::span<const DiscreteLaw> laws,
                                     double xi) {
  const CoordinateLaws per(laws, theta.size());
  std::complex<double> acc{1.0, 0.0};
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] == 0.0) continue;
    acc *= charfun(per[j], theta[j] * xi);
  }
  return acc;
}

SmoothingTarget smoothing_target(const CoefficientVector& theta,
                                 std::span<const DiscreteLaw> laws) {
  const CoordinateLaws per(laws, theta.size());
  double frequency = 0.0;
  CompensatedSum fourth;  // E S⁴ = 3 + Σ θ_j⁴ (E X_j⁴ - 3) for unit variances
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double vmax = 0.0;
    CompensatedSum m4;
    for (const auto& a : per[j].atoms()) {
      vmax = std::max(vmax, std::abs(a.value));
      m4.add(a.weight * a.value * a.value * a.value * a.value);
    }
    frequency += std::abs(theta[j]) * vmax;
    const double t2 = theta[j] * theta[j];
    fourth.add(t2 * t2 * (m4.value() - 3.0));
  }
  const double es4 = std::max(3.0 + fourth.value(), 0.0);

  SmoothingTarget target;
  target.max_frequency = std::max(frequency, 1.0);
  target.third_moment_bound = std::pow(es4, 0.75) + kGaussAbsThird;
  // Copies keep the closure valid after the caller's spans go away.
  std::vector<double> coords(theta.coords().begin(), theta.coords().end());
  std::vector<DiscreteLaw> owned;
  owned.reserve(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) owned.push_back(per[j]);
  target.cf = [coords = std::move(coords), owned = std::move(owned)](double xi) {
    std::complex<double> acc{1.0, 0.0};
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (coords[j] == 0.0) continue;
      acc *= charfun(owned[j], coords[j] * xi);
    }
    return acc;
  };
  return target;
}

double smoothing_integral(const SmoothingTarget& target, double lo, double hi,
                          double abs_tol) {
  if (!(lo >= 0.0) || hi < lo) {
    throw PreconditionViolated("smoothing_integral needs 0 <= lo <= hi");
  }
  if (hi == lo) return 0.0;
  double removed = 0.0;
  if (lo < kNearZeroCutoff) {
    const double top = std::min(hi, kNearZeroCutoff);
    removed = target.third_moment_bound *
              (top * top * top - lo * lo * lo) / 18.0;
    lo = top;
  }
  if (hi <= lo) return removed;
  QuadratureOptions opts;
  opts.abs_tol = abs_tol;
  opts.max_panel_width = 0.25 * 2.0 * kPi / target.max_frequency;
  auto integrand = [&](double xi) {
    return std::abs(target.cf(xi) - std::exp(-0.5 * xi * xi)) / xi;
  };
  return removed + integrate(integrand, lo, hi, opts).value;
}

double esseen_bound(const SmoothingTarget& target, double T,
                    const EsseenConstants& constants) {
  if (!(T > 0.0)) throw PreconditionViolated("esseen_bound needs T > 0");
  // The integrand is even in ξ.
  const double integral = 2.0 * smoothing_integral(target, 0.0, T);
  return constants.leading * integral + constants.remainder / T;
}

double esseen_bound(const CoefficientVector& theta,
                    std::span<const DiscreteLaw> laws, double T,
                    const EsseenConstants& constants) {
  return esseen_bound(smoothing_target(theta, laws), T, constants);
}

double esseen_bound_sweep(const CoefficientVector& theta,
                          std::span<const DiscreteLaw> laws,
                          std::span<const double> cutoffs,
                          const EsseenConstants& constants) {
  if (cutoffs.empty()) throw PreconditionViolated("empty cutoff sweep");
  const auto target = smoothing_target(theta, laws);
  double best = std::numeric_limits<double>::infinity();
  for (double T : cutoffs) best = std::min(best, esseen_bound(target, T, constants));
  return best;
}

nlohmann::json to_json(const RegimeReport& report) {
  nlohmann::json j;
  j["epsilon"] = report.epsilon;
  j["r1"] = report.r1;
  j["r2_min"] = report.r2_min;
  j["r2_reference"] = report.r2_reference;
  j["boundaries"] = report.boundaries;
  j["segment_integrals"] = report.segment_integrals;
  return j;
}

double minimal_r2(const CoefficientVector& theta,
                  std::span<const MomentProfile> profiles) {
  const std::size_t n = theta.size();
  if (profiles.size() != 1 && profiles.size() != n) {
    throw PreconditionViolated("expected 1 or n moment profiles");
  }
  std::vector<std::pair<double, double>> thresholds;  // (|θ_j| γ̄_j³, θ_j²)
  thresholds.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& p = profiles[profiles.size() == 1 ? 0 : j];
    thresholds.emplace_back(std::abs(theta[j]) * p.gamma_bar3, theta[j] * theta[j]);
  }
  std::sort(thresholds.begin(), thresholds.end());
  CompensatedSum mass;
  for (const auto& [threshold, weight] : thresholds) {
    mass.add(weight);
    if (mass.value() >= 0.125) return threshold;
  }
  return thresholds.back().first;
}

RegimeReport regime_report(const CoefficientVector& theta,
                           std::span<const DiscreteLaw> laws,
                           double middle_constant) {
  const std::size_t n = theta.size();
  const CoordinateLaws per(laws, n);
  std::vector<MomentProfile> profiles;
  profiles.reserve(n);
  for (std::size_t j = 0; j < n; ++j) profiles.push_back(moments(per[j]));

  CompensatedSum quartic;
  CompensatedSum skew;
  CompensatedSum delta4_total;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = theta[j];
    const double t2 = t * t;
    quartic.add(t2 * t2 * profiles[j].delta4);
    skew.add(profiles[j].gamma3 * t2 * t);
    delta4_total.add(profiles[j].delta4);
  }

  RegimeReport report;
  report.epsilon = std::sqrt(std::sqrt(quartic.value()));
  report.r1 = std::abs(skew.value());
  report.r2_min = minimal_r2(theta, profiles);
  const double nd = static_cast<double>(n);
  const double delta4 = delta4_total.value() / nd;
  report.r2_reference = 200.0 * std::sqrt(delta4) / std::sqrt(nd);

  const double inner = std::pow(report.epsilon, -2.0 / 3.0);
  const double middle = report.r2_min > 0.0
                            ? middle_constant / report.r2_min
                            : std::numeric_limits<double>::infinity();
  report.boundaries = {0.0, inner, middle, nd / delta4};

  const auto target = smoothing_target(theta, laws);
  for (std::size_t s = 0; s < 3; ++s) {
    const double a = report.boundaries[s];
    const double b = report.boundaries[s + 1];
    report.segment_integrals[s] =
        (b > a && std::isfinite(b)) ? smoothing_integral(target, a, b) : 0.0;
  }
  return report;
}

}  // namespace belab
