// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "belab/arithmetic.hpp"
#include "belab/laws.hpp"
#include "belab/rng.hpp"

namespace belab {

/// Uniform point on S^{n-1}: n standard normals from rng, normalized.
CoefficientVector sample_direction(std::size_t n, CounterRng& rng);

/// Same, drawn from stream 0 of seed.
CoefficientVector sample_direction(std::size_t n, std::uint64_t seed);

/// Density of one coordinate of a uniform point on S^{n-1}, n >= 2:
/// proportional to (1 - t²)^{(n-3)/2} on (-1, 1), zero outside.
double marginal_density(std::size_t n, double t);

/// ∫ g(t) f_n(t) dt, evaluated with t = sin u so the n = 2 endpoint
/// singularity disappears. max_frequency bounds the oscillation of g.
double marginal_expectation(std::size_t n, const std::function<double(double)>& g,
                            double max_frequency, double abs_tol = 1e-12);

/// J_n(ξ) = E cos(ξ Θ_1), by quadrature to 1e-12.
double bessel_transform(std::size_t n, double xi);

/// Largest c with J_n(ξ) <= 1 - c min{ξ²/n, 1} on the grid (0 excluded).
double bessel_decay_fit(std::size_t n, std::span<const double> xi_grid);

/// E |φ(τ Θ_1)|² by quadrature against f_n.
double expected_sq_charfun(const DiscreteLaw& law, std::size_t n, double tau);

/// Largest c with E|φ(τΘ_1)|² <= 1 - c min{τ²/n, δ⁻⁴} on the grid; zero
/// entries of the grid are skipped. Requires a standardized law.
double sphere_charfun_fit(const DiscreteLaw& law, std::size_t n,
                          std::span<const double> tau_grid);

/// Nonnegative function on [-1, 1] with a declared sup bound.
struct BoundedFunction {
  std::function<double(double)> f;
  double bound = 1.0;
  double max_frequency = 10.0;  // oscillation scale for the quadrature
};

struct CllResult {
  double lhs;     // Monte Carlo mean of Π f_j(Θ_j)
  double rhs;     // Π (E f_j(Θ_j)²)^{1/2}
  double radius;  // standard error of lhs
};

/// fs has one entry per coordinate or a single shared entry. Requires
/// m >= 10⁴; throws PreconditionViolated if a value leaves [0, bound].
CllResult cll_check(std::span<const BoundedFunction> fs, std::size_t n,
                    std::size_t m, std::uint64_t seed);

struct DirectionStats {
  double skew_term;     // Σ γ_j³ θ_j³
  double quartic_term;  // Σ δ_j⁴ θ_j⁴
  std::size_t n;
  double delta4_mean;   // Σ δ_j⁴ / n
};

/// profiles has one entry per coordinate or a single shared entry.
DirectionStats direction_stats(const CoefficientVector& theta,
                               std::span<const MomentProfile> profiles);

struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

struct TailTable {
  std::vector<double> t;
  std::vector<double> survival_skew;     // P(n |skew| / δ⁴ >= t)
  std::vector<double> survival_quartic;  // P(n quartic / δ⁴ >= t)
  TailFit skew_fit;     // -ln survival against t^{2/3}
  TailFit quartic_fit;  // -ln survival against t^{1/2}
  std::size_t samples = 0;
  double fit_t_min = 5.0;
};

struct TailOptions {
  double t_step = 0.25;
  double fit_t_min = 5.0;
};

/// Empirical survival curves of the normalized deviation statistics over
/// `samples` uniform directions; sample i uses stream i of seed.
TailTable deviation_tail_curves(std::span<const MomentProfile> profiles,
                                std::size_t n, std::size_t samples,
                                std::uint64_t seed, const TailOptions& opts = {});

/// CSV with columns t,survival_skew,survival_quartic followed by fit rows.
void write_tail_csv(std::ostream& out, const TailTable& table);

}  // namespace belab
