// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "belab/errors.hpp"

namespace belab {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ≈ slope·x + intercept. Throws DegenerateFit when
/// fewer than two points are given or all x coincide.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) throw DegenerateFit("need at least two points");
  CompensatedSum sx;
  CompensatedSum sy;
  for (std::size_t i = 0; i < m; ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / static_cast<double>(m);
  const double my = sy.value() / static_cast<double>(m);
  CompensatedSum sxx;
  CompensatedSum sxy;
  CompensatedSum syy;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0)) throw DegenerateFit("all abscissae coincide");
  LinearFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy.value() > 0.0
                      ? std::clamp(sxy.value() * sxy.value() /
                                       (sxx.value() * syy.value()),
                                   0.0, 1.0)
                      : 1.0;
  return fit;
}

struct QuadratureOptions {
  double abs_tol = 1e-10;
  // Panels wider than this are split before refinement starts; oscillatory
  // integrands pass a quarter of their shortest period.
  double max_panel_width = std::numeric_limits<double>::infinity();
  std::size_t max_panels = 1'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
};

namespace detail {

// 15-point Gauss-Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
};

template <class F>
Panel gauss_kronrod15(const F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t k = 0; k < 7; ++k) {
    const double dx = half * kKronrodNodes[k];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[k] * pair;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

struct PanelOrder {
  // Largest error first; ties broken by lower midpoint so the refinement
  // sequence is a function of the integrand alone.
  bool operator()(const Panel& a, const Panel& b) const noexcept {
    if (a.error != b.error) return a.error < b.error;
    return (a.lo + a.hi) > (b.lo + b.hi);
  }
};

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of f over [lo, hi].
/// Throws QuadratureFailure when the panel budget runs out before the
/// summed error estimate drops below opts.abs_tol.
template <class F>
QuadratureResult integrate(const F& f, double lo, double hi,
                           const QuadratureOptions& opts = {}) {
  if (!(hi > lo)) return {};
  std::priority_queue<detail::Panel, std::vector<detail::Panel>,
                      detail::PanelOrder>
      heap;
  const double width = hi - lo;
  std::size_t initial = 1;
  if (std::isfinite(opts.max_panel_width) && opts.max_panel_width > 0.0) {
    initial = static_cast<std::size_t>(std::ceil(width / opts.max_panel_width));
    initial = std::max<std::size_t>(initial, 1);
  }
  if (initial > opts.max_panels) {
    throw QuadratureFailure("initial panel count " + std::to_string(initial) +
                            " exceeds budget");
  }
  double error = 0.0;
  for (std::size_t i = 0; i < initial; ++i) {
    const double a = lo + width * static_cast<double>(i) / initial;
    const double b = (i + 1 == initial)
                         ? hi
                         : lo + width * static_cast<double>(i + 1) / initial;
    auto p = detail::gauss_kronrod15(f, a, b);
    error += p.error;
    heap.push(p);
  }
  while (error > opts.abs_tol) {
    if (heap.size() >= opts.max_panels) {
      throw QuadratureFailure("panel budget exhausted with error estimate " +
                              std::to_string(error));
    }
    const detail::Panel worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw QuadratureFailure("panel width underflow near " +
                              std::to_string(mid));
    }
    heap.pop();
    auto left = detail::gauss_kronrod15(f, worst.lo, mid);
    auto right = detail::gauss_kronrod15(f, mid, worst.hi);
    heap.push(left);
    heap.push(right);
    error += left.error + right.error - worst.error;
    if (error <= opts.abs_tol) {
      // Re-add from scratch to rule out drift in the running total.
      CompensatedSum exact;
      auto copy = heap;
      while (!copy.empty()) {
        exact.add(copy.top().error);
        copy.pop();
      }
      error = exact.value();
    }
  }
  // Sum in ascending-lo order for a reproducible total.
  std::vector<detail::Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const auto& a, const auto& b) { return a.lo < b.lo; });
  CompensatedSum value;
  CompensatedSum err;
  for (const auto& p : panels) {
    value.add(p.value);
    err.add(p.error);
  }
  return {value.value(), err.value(), panels.size()};
}

}  // namespace belab
