// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "belab/arithmetic.hpp"
#include "belab/kolmogorov.hpp"
#include "belab/laws.hpp"
#include "json.hpp"

namespace belab::harness {

enum class Scenario { kRate, kCertify, kEsseen, kSphereTails, kCheckLemmas };

std::string_view scenario_name(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;

/// How the coefficient vector is chosen for each n.
struct ThetaSpec {
  enum class Kind { kUniform, kTheta0, kRandom, kExplicit };
  Kind kind = Kind::kUniform;
  std::uint64_t seed = 0;        // kRandom
  std::vector<double> coords;    // kExplicit, normalized on use

  CoefficientVector build(std::size_t n) const;
  std::string describe() const;
};

enum class Estimator { kAuto, kExact, kMonteCarlo };

struct ExperimentConfig {
  Scenario scenario = Scenario::kRate;
  DiscreteLaw law = DiscreteLaw::rademacher();  // standardized
  std::string law_description = "rademacher";
  ThetaSpec theta;
  std::vector<std::size_t> n_values;
  std::size_t atom_budget = kDefaultAtomBudget;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "belab-out";
  unsigned threads = 1;

  // rate
  Estimator estimator = Estimator::kAuto;
  std::size_t mc_samples = 100'000;
  double mc_alpha = 0.01;
  std::optional<double> slope_min;
  std::optional<double> slope_max;

  // certify
  double grid_step = 1e-4;
  double r_tol = 0.01;
  std::optional<double> certify_r;
  std::optional<std::string> expect_outcome;

  // esseen
  std::vector<double> esseen_cutoffs = {2.0, 5.0, 10.0, 20.0, 50.0};
  double be_constant = 0.56;
  double middle_constant = 1.0;

  // sphere-tails
  std::size_t tail_samples = 100'000;
  double tail_t_step = 0.25;
  double tail_t_min = 5.0;
  std::optional<double> tail_min_r_squared;
  std::size_t quantile_directions = 100;
  std::vector<std::size_t> quantile_n = {8, 12, 16};

  // check-lemmas
  std::size_t lemma_trials = 200;

  /// Canonical JSON of every field that influences results (threads and
  /// output location excluded).
  nlohmann::json canonical() const;
  /// 16 hex digits identifying canonical().
  std::string digest() const;
};

/// Fills a config from a JSON document ("spec_version": 1). Missing fields
/// keep the scenario defaults. Throws ConfigError on any schema problem.
ExperimentConfig parse_config(const nlohmann::json& doc, Scenario scenario);

ExperimentConfig load_config(const std::filesystem::path& path, Scenario scenario);

/// Scenario defaults without a config file.
ExperimentConfig default_config(Scenario scenario);

/// Validates cross-field invariants; throws ConfigError.
void validate(const ExperimentConfig& config);

}  // namespace belab::harness
