// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace belab {

/// Absolute tolerance under which neighbouring atom values are merged.
inline constexpr double kAtomMergeTol = 1e-12;
/// Tolerance on the total mass and on the standardization moments.
inline constexpr double kLawTol = 1e-12;

struct Atom {
  double value;
  double weight;
};

/*!
 * \brief Finitely supported probability law.
 *
 * Immutable once built. Atoms are kept sorted by value with near-duplicates
 * (within kAtomMergeTol) merged into their weighted mean, and zero-weight
 * atoms dropped.
 */
class DiscreteLaw {
 public:
  /// Validates total mass (within kLawTol) and positivity, then canonicalizes.
  static DiscreteLaw from_atoms(std::vector<Atom> atoms);

  static DiscreteLaw point_mass(double value);
  static DiscreteLaw rademacher();
  /// Raw Bernoulli {0: 1-p, 1: p}; not standardized.
  static DiscreteLaw bernoulli(double p);
  /// Raw three-point law {-1: p, 0: 1-2p, a: p}; symmetric iff a == 1.
  static DiscreteLaw three_point(double a, double p);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double mean() const noexcept;
  double variance() const noexcept;
  bool is_standardized() const noexcept;
  bool is_symmetric(double tol = kAtomMergeTol) const noexcept;

  /// Canonical form of an unnormalized atom list; the mass is rescaled to 1.
  /// Used by the convolution routines, which only drift by rounding.
  static DiscreteLaw normalized(std::vector<Atom> atoms);

 private:
  explicit DiscreteLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

  std::vector<Atom> atoms_;
};

/// Third and fourth moments of a standardized law.
struct MomentProfile {
  double gamma3;      // E X^3
  double gamma_bar3;  // E |X|^3
  double delta4;      // E X^4

  double gamma() const noexcept;      // signed cube root of gamma3
  double gamma_bar() const noexcept;  // gamma_bar3^{1/3}
  double delta() const noexcept;      // delta4^{1/4}
};

/// Affine image (X - mean) / sd. Throws DegenerateLaw when variance <= 1e-14.
DiscreteLaw standardize(const DiscreteLaw& law);

/// Throws PreconditionViolated unless the law is standardized.
MomentProfile moments(const DiscreteLaw& law);

/// E exp(-i xi X).
std::complex<double> charfun(const DiscreteLaw& law, double xi) noexcept;

/// Law of X - X' for an independent copy X'.
DiscreteLaw symmetrize(const DiscreteLaw& law);

struct PaleyZygmundResult {
  bool lower_tail;     // P(Y >= 1/2) >= 1/(4M)
  bool truncated_mean; // E Y 1{Y <= 5M} >= 4/5
};

/// Evaluates both anti-concentration inequalities for a nonnegative law with
/// unit mean and E Y^2 <= M. Throws PreconditionViolated otherwise.
PaleyZygmundResult paley_zygmund_check(const DiscreteLaw& law, double M);

/// Parses "rademacher", "bernoulli(p)", "threepoint(a,p)" or "point(a)" and
/// returns the standardized law (point masses are returned as given).
DiscreteLaw parse_law_preset(std::string_view spec);

}  // namespace belab
