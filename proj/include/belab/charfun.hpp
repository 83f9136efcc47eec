// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>

#include "belab/arithmetic.hpp"
#include "belab/laws.hpp"
#include "json.hpp"

namespace belab {

/// Per-coordinate laws: either one law per coordinate or a single law shared
/// by all of them. Throws PreconditionViolated on any other length.
class CoordinateLaws {
 public:
  CoordinateLaws(std::span<const DiscreteLaw> laws, std::size_t n);

  const DiscreteLaw& operator[](std::size_t j) const noexcept {
    return laws_.size() == 1 ? laws_[0] : laws_[j];
  }
  std::size_t size() const noexcept { return n_; }

 private:
  std::span<const DiscreteLaw> laws_;
  std::size_t n_;
};

/// Π_j φ_j(θ_j ξ).
std::complex<double> product_charfun(const CoefficientVector& theta,
                                     std::span<const DiscreteLaw> laws, double xi);

/*!
 * \brief Constants of the smoothing inequality
 *   sup|F - Φ| <= leading ∫_{-T}^{T} |φ - e^{-ξ²/2}|/|ξ| dξ + remainder / T.
 *
 * Defaults are the classical Esseen values 1/π and 24/(π√(2π)).
 */
struct EsseenConstants {
  double leading = 0.3183098861837907;
  double remainder = 3.047694524843567;
};

/// Description of the characteristic function being compared with e^{-ξ²/2}.
struct SmoothingTarget {
  std::function<std::complex<double>(double)> cf;
  // Largest frequency present; panels are capped at a quarter period.
  double max_frequency = 1.0;
  // Upper bound on E|S|³ + E|G|³, used to bound the mass cut away near 0.
  double third_moment_bound = 0.0;
};

SmoothingTarget smoothing_target(const CoefficientVector& theta,
                                 std::span<const DiscreteLaw> laws);

/// ∫_{lo}^{hi} |φ(ξ) - e^{-ξ²/2}| dξ/ξ for 0 <= lo <= hi. The piece below
/// |ξ| = 1e-3 is replaced by its Taylor bound third_moment_bound·ξ³/18.
double smoothing_integral(const SmoothingTarget& target, double lo, double hi,
                          double abs_tol = 1e-10);

double esseen_bound(const SmoothingTarget& target, double T,
                    const EsseenConstants& constants = {});

double esseen_bound(const CoefficientVector& theta,
                    std::span<const DiscreteLaw> laws, double T,
                    const EsseenConstants& constants = {});

/// Minimum of esseen_bound over the given cutoffs.
double esseen_bound_sweep(const CoefficientVector& theta,
                          std::span<const DiscreteLaw> laws,
                          std::span<const double> cutoffs,
                          const EsseenConstants& constants = {});

struct RegimeReport {
  double epsilon = 0.0;       // (Σ θ_j⁴ δ_j⁴)^{1/4}
  double r1 = 0.0;            // |Σ γ_j³ θ_j³|
  double r2_min = 0.0;        // smallest R₂ with Σ_{|θ_j| γ̄_j³ <= R₂} θ_j² >= 1/8
  double r2_reference = 0.0;  // 200 δ² / √n
  std::array<double, 4> boundaries{};  // 0, ε^{-2/3}, c/R₂, n/δ⁴
  std::array<double, 3> segment_integrals{};
};

nlohmann::json to_json(const RegimeReport& report);

/// Smallest R₂ with Σ_{j : |θ_j| γ̄_j³ <= R₂} θ_j² >= 1/8; profiles has one
/// entry per coordinate or a single shared entry.
double minimal_r2(const CoefficientVector& theta,
                  std::span<const MomentProfile> profiles);

/// Requires standardized laws. middle_constant is the c in c/R₂.
RegimeReport regime_report(const CoefficientVector& theta,
                           std::span<const DiscreteLaw> laws,
                           double middle_constant = 1.0);

}  // namespace belab
