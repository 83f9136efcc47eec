// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "belab/harness/config.hpp"

namespace belab::harness {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<std::size_t, double>> points;
};

/// Least squares on (ln n, ln distance). Needs at least three points with
/// positive distances and distinct n; throws DegenerateFit otherwise.
RateFit fit_rate(std::span<const std::pair<std::size_t, double>> points);

nlohmann::json to_json(const RateFit& fit);

enum ExitCode : int {
  kExitOk = 0,
  kExitAssertion = 1,
  kExitConfig = 2,
  kExitBudget = 3,
  kExitQuadrature = 4,
};

/// Runs one scenario, writing its files under config.output_dir and a
/// human-readable summary to log. Errors are mapped to exit codes here.
int run(const ExperimentConfig& config, std::ostream& log);

}  // namespace belab::harness
