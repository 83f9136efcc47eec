// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "belab/laws.hpp"
#include "json.hpp"

namespace belab {

/// Unit coefficient vector θ ∈ S^{n-1}.
class CoefficientVector {
 public:
  /// Throws PreconditionViolated unless |Σθ² - 1| <= 1e-12 and n >= 1.
  static CoefficientVector from_unit(std::vector<double> coords);
  /// Divides by the Euclidean norm; throws on the zero vector.
  static CoefficientVector normalized(std::vector<double> coords);
  /// (1, ..., 1) / √n.
  static CoefficientVector uniform(std::size_t n);
  /// Standard basis vector e_{index}.
  static CoefficientVector basis(std::size_t n, std::size_t index);

  std::span<const double> coords() const noexcept { return coords_; }
  std::size_t size() const noexcept { return coords_.size(); }
  double operator[](std::size_t j) const noexcept { return coords_[j]; }
  double max_abs() const noexcept;

  /// 64-bit FNV-1a of the coordinate bytes, as 16 hex digits.
  std::string digest() const;

 private:
  explicit CoefficientVector(std::vector<double> coords)
      : coords_(std::move(coords)) {}

  std::vector<double> coords_;
};

/// Euclidean distance from x to ℤⁿ.
double dist_to_lattice(std::span<const double> x) noexcept;

/// d(ξθ, ℤⁿ).
double dist_to_lattice(const CoefficientVector& theta, double xi) noexcept;

/// (1, √2, -1, -√2, ...) / √(3n/2). Throws BadDimension unless 4 | n.
CoefficientVector theta_zero(std::size_t n);

struct PowerSumConditions {
  double r_i;   // n |Σθ³|
  double r_ii;  // n Σθ⁴
};

PowerSumConditions check_conditions_i_ii(const CoefficientVector& theta) noexcept;

/// (1/10) min{|ξ|, (n/R)/|ξ|}.
double condition_iii_rhs(std::size_t n, double R, double xi) noexcept;

enum class CertificateOutcome { kCertified, kRefuted, kInconclusive };

std::string_view outcome_name(CertificateOutcome outcome) noexcept;

struct ArithmeticCertificate {
  CertificateOutcome outcome = CertificateOutcome::kInconclusive;
  double R = 1.0;
  double grid_step = 1e-4;
  // min over grid points of d(ξθ) - RHS(ξ) - 1.1·grid_step; >= 0 iff certified.
  double margin = 0.0;
  std::optional<double> counterexample_xi;
  std::size_t n = 0;
  std::string theta_digest;
  std::size_t grid_points = 0;
};

nlohmann::json to_json(const ArithmeticCertificate& cert);

/*!
 * \brief d(ξθ, ℤⁿ) sampled on the grid ξ_i = i·h covering [1/(2 max|θ|), n].
 *
 * Below the first grid point d(ξθ, ℤⁿ) = |ξ| exactly, so the grid only has
 * to cover the rest of the range. When 1/h is an integer K the points are
 * computed as i/K, which makes integers such as ξ = √n exact grid points.
 */
class LatticeGrid {
 public:
  LatticeGrid(const CoefficientVector& theta, double grid_step);

  std::size_t size() const noexcept { return dist_.size(); }
  double xi(std::size_t k) const noexcept;
  double dist(std::size_t k) const noexcept { return dist_[k]; }
  double grid_step() const noexcept { return step_; }
  double analytic_limit() const noexcept { return analytic_limit_; }

  /// Condition (iii) for a given R against this grid.
  ArithmeticCertificate certify(double R) const;

 private:
  std::size_t n_;
  double step_;
  double analytic_limit_;
  std::optional<double> steps_per_unit_;
  std::size_t first_index_ = 0;
  std::vector<double> dist_;
  std::string digest_;
};

/// Grid + Lipschitz-margin certification of condition (iii) for |ξ| <= n.
/// Requires grid_step <= 1e-2.
ArithmeticCertificate certify_condition_iii(const CoefficientVector& theta,
                                            double R, double grid_step);

struct CertifiedRange {
  double r_upper;  // +inf when nothing up to n² certifies
  double r_lower;  // largest R refuted by a counterexample, 0 if none
};

/// Brackets the minimal R satisfying conditions (i)-(iii) by bisection in
/// log R over [max(R_i, R_ii, 1), n²].
CertifiedRange minimal_certified_r(const CoefficientVector& theta,
                                   double grid_step, double r_tol = 0.01);

/// S(ξ) = sqrt(E d²((ξY/2π)θ, ℤⁿ)) for a symmetric law of Y.
double s_function(const CoefficientVector& theta, const DiscreteLaw& law_y,
                  double xi);

/// ∫_{T^{1/6}}^{T} exp(-4 S²(ξ)) dξ/ξ to 1e-10 absolute. Requires T >= 1.
double tail_integral_check(const CoefficientVector& theta,
                           const DiscreteLaw& law_y, double T);

/// Largest c̃ with d²(ξ,ℤ) + d²(ξ√2,ℤ) >= min{3ξ², c̃/ξ²} at every grid point
/// of [1/2, xi_max].
double sqrt2_diophantine_check(double xi_max, double grid_step);

}  // namespace belab
