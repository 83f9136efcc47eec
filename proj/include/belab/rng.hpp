// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "belab/numeric.hpp"

namespace belab {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/*!
 * Counter-based generator: the i-th output of a stream is a pure function of
 * (key, i), where the key is derived from (seed, stream index). Work items
 * take one stream each, so results do not depend on which thread ran them.
 */
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix64(seed ^ mix64(stream + kGolden))) {}

  std::uint64_t next() noexcept { return mix64(key_ + kGolden * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two outputs per draw.
  double normal() noexcept {
    const double u = uniform_open();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
  }

  /// Independent child stream; the parent is unaffected.
  CounterRng split(std::uint64_t index) const noexcept {
    return CounterRng(key_, index);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace belab
