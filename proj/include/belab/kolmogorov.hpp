// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "belab/arithmetic.hpp"
#include "belab/laws.hpp"
#include "json.hpp"

namespace belab {

inline constexpr std::size_t kDefaultAtomBudget = std::size_t{1} << 26;

enum class DistanceMethod { kExact, kMonteCarlo };

std::string_view method_name(DistanceMethod method) noexcept;

/// sup_t |F(t) - Φ(t)| with provenance.
struct KolmogorovEstimate {
  double value = 0.0;
  DistanceMethod method = DistanceMethod::kExact;
  double confidence_radius = 0.0;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;

  /// Interval form sup_{a<b} |P(a <= S <= b) - (Φ(b) - Φ(a))| is at most this.
  double interval_bound() const noexcept { return 2.0 * value; }
};

nlohmann::json to_json(const KolmogorovEstimate& est);

/// Standard normal CDF, absolute error <= 1e-15 on |t| <= 8.
double normal_cdf(double t) noexcept;

/// Exact law of Σ θ_j X_j for iid X_j ~ law. Throws BudgetExceeded when
/// (atom count)^(active coordinates) exceeds atom_budget.
DiscreteLaw weighted_sum_law(const CoefficientVector& theta,
                             const DiscreteLaw& law,
                             std::size_t atom_budget = kDefaultAtomBudget);

/// One linear scan of a sorted law against Φ.
double kolmogorov_distance(const DiscreteLaw& law) noexcept;

KolmogorovEstimate exact_distance(const CoefficientVector& theta,
                                  const DiscreteLaw& law,
                                  std::size_t atom_budget = kDefaultAtomBudget);

/// sqrt(ln(2/alpha) / (2m)).
double dkw_radius(std::size_t m, double alpha) noexcept;

/*!
 * Monte Carlo estimate from m iid samples of Σ θ_j X_j. Samples are drawn in
 * fixed chunks, chunk c using stream c of the seed, so the value depends only
 * on (seed, m) and not on the worker count. Requires m >= 1000.
 */
KolmogorovEstimate mc_distance(const CoefficientVector& theta,
                               const DiscreteLaw& law, std::size_t m,
                               double alpha, std::uint64_t seed);

/// constant · E|X|³ / √n.
double classical_be_bound(const MomentProfile& moment, std::size_t n,
                          double constant = 0.56);

/// constant · E|X|³ · Σ|θ_j|³, the Lyapunov form for weighted sums; equals
/// the bound above when θ is uniform.
double classical_be_bound(const MomentProfile& moment, const CoefficientVector& theta,
                          double constant = 0.56);

/// CSV rows "t,F,Phi,gap" for every atom of the law.
void write_cdf_csv(std::ostream& out, const DiscreteLaw& law);

}  // namespace belab
