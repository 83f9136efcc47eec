// SPDX-License-Identifier: Apache-2.0
#include <atomic>

#include "belab/simd/lattice_kernels.hpp"

namespace belab::simd {

namespace {

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(BELAB_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

std::atomic<Isa>& selected() noexcept {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() noexcept {
  return supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

bool force_isa(Isa isa) noexcept {
  if (!supported(isa)) return false;
  selected().store(isa, std::memory_order_relaxed);
  return true;
}

void reset_isa() noexcept {
  selected().store(detected_isa(), std::memory_order_relaxed);
}

double lattice_dist_sq(std::span<const double> coords, double scale) noexcept {
#if defined(BELAB_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::lattice_dist_sq(coords, scale);
#endif
  return scalar::lattice_dist_sq(coords, scale);
}

void lattice_dist_sq_batch(std::span<const double> coords,
                           std::span<const double> scales,
                           std::span<double> out) noexcept {
#if defined(BELAB_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) {
    avx2::lattice_dist_sq_batch(coords, scales, out);
    return;
  }
#endif
  scalar::lattice_dist_sq_batch(coords, scales, out);
}

}  // namespace belab::simd
