// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "belab/laws.hpp"
#include "belab/rng.hpp"

namespace belab::harness {

/// One property check: `metric` is compared against `threshold` in the
/// direction the property states (worst case over all trials).
struct CheckResult {
  std::string name;
  bool passed = false;
  double metric = 0.0;
  double threshold = 0.0;
  std::size_t trials = 0;
  std::string detail;
};

/// Random standardized law with 2 to 6 atoms.
DiscreteLaw random_law(CounterRng& rng);

/// Runs every property oracle. Trial i of a check draws from its own stream,
/// so results do not depend on the worker count.
std::vector<CheckResult> run_lemma_checks(std::uint64_t seed, std::size_t trials);

}  // namespace belab::harness
