// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstddef>

#include "belab/simd/lattice_kernels.hpp"

namespace belab::simd::scalar {

namespace {

inline double frac_sq(double x) noexcept {
  const double r = x - std::nearbyint(x);
  return r * r;
}

}  // namespace

double lattice_dist_sq(std::span<const double> coords, double scale) noexcept {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = coords.size();
  for (std::size_t j = 0; j < n; ++j) {
    lane[j & 3] += frac_sq(scale * coords[j]);
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void lattice_dist_sq_batch(std::span<const double> coords,
                           std::span<const double> scales,
                           std::span<double> out) noexcept {
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double s = scales[i];
    double acc = 0.0;
    for (double c : coords) acc += frac_sq(s * c);
    out[i] = acc;
  }
}

}  // namespace belab::simd::scalar
