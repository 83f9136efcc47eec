// SPDX-License-Identifier: Apache-2.0
// Built with -mavx2 only; callers reach it through the runtime dispatcher.
#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "belab/simd/lattice_kernels.hpp"

namespace belab::simd::avx2 {

namespace {

constexpr int kRoundNearest = _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC;

inline __m256d frac_sq(__m256d x) noexcept {
  const __m256d r = _mm256_sub_pd(x, _mm256_round_pd(x, kRoundNearest));
  return _mm256_mul_pd(r, r);
}

}  // namespace

double lattice_dist_sq(std::span<const double> coords, double scale) noexcept {
  const std::size_t n = coords.size();
  const double* p = coords.data();
  const __m256d s = _mm256_set1_pd(scale);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc = _mm256_add_pd(acc, frac_sq(_mm256_mul_pd(s, _mm256_loadu_pd(p + j))));
  }
  if (j < n) {
    // Zero padding contributes +0.0 to the idle lanes.
    alignas(32) double tail[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; j + k < n; ++k) tail[k] = p[j + k];
    acc = _mm256_add_pd(acc, frac_sq(_mm256_mul_pd(s, _mm256_load_pd(tail))));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void lattice_dist_sq_batch(std::span<const double> coords,
                           std::span<const double> scales,
                           std::span<double> out) noexcept {
  const std::size_t m = scales.size();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d s = _mm256_loadu_pd(scales.data() + i);
    __m256d acc = _mm256_setzero_pd();
    for (double c : coords) {
      acc = _mm256_add_pd(acc, frac_sq(_mm256_mul_pd(s, _mm256_set1_pd(c))));
    }
    _mm256_storeu_pd(out.data() + i, acc);
  }
  if (i < m) {
    scalar::lattice_dist_sq_batch(coords, scales.subspan(i), out.subspan(i));
  }
}

}  // namespace belab::simd::avx2
