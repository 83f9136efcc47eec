// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string_view>

namespace belab::simd {

/*!
 * \brief Squared distance to the integer lattice, Σ_j d²(s·x_j, ℤ).
 *
 * This is the inner loop of the lattice certifier, the S function and the
 * tail integrals. Every variant accumulates in four interleaved lanes
 * (lane k sums j ≡ k mod 4, lanes combined as (l0+l1)+(l2+l3)) and rounds
 * half-to-even, so all variants return bit-identical results. The batch
 * form evaluates many scales against one coordinate vector, one scale per
 * SIMD lane, with a sequential sum over j.
 */
enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best variant supported by this CPU and build.
Isa detected_isa() noexcept;

/// Variant used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Pins the dispatch to one variant; returns false if it is unsupported.
bool force_isa(Isa isa) noexcept;

/// Restores automatic selection.
void reset_isa() noexcept;

double lattice_dist_sq(std::span<const double> coords, double scale) noexcept;

/// out[i] = Σ_j d²(scales[i]·coords[j], ℤ); out.size() must equal scales.size().
void lattice_dist_sq_batch(std::span<const double> coords,
                           std::span<const double> scales,
                           std::span<double> out) noexcept;

namespace scalar {
double lattice_dist_sq(std::span<const double> coords, double scale) noexcept;
void lattice_dist_sq_batch(std::span<const double> coords,
                           std::span<const double> scales,
                           std::span<double> out) noexcept;
}  // namespace scalar

#if defined(BELAB_HAVE_AVX2)
namespace avx2 {
double lattice_dist_sq(std::span<const double> coords, double scale) noexcept;
void lattice_dist_sq_batch(std::span<const double> coords,
                           std::span<const double> scales,
                           std::span<double> out) noexcept;
}  // namespace avx2
#endif

}  // namespace belab::simd
