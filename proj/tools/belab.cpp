// SPDX-License-Identifier: Apache-2.0
// Command-line front end: one subcommand per scenario.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "belab/errors.hpp"
#include "belab/harness/config.hpp"
#include "belab/harness/run.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> budget;
};

void add_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "JSON experiment config")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out,
                  "output directory (overrides the config and BELAB_OUT_DIR)");
  cmd->add_option("--seed", flags.seed, "base seed");
  cmd->add_option("--threads", flags.threads, "worker threads")
      ->check(CLI::Range(1u, 1024u));
  cmd->add_option("--budget", flags.budget, "atom budget for exact enumeration")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace belab::harness;
  CLI::App app{"Numerical experiments on normal approximation of weighted sums"};
  app.set_version_flag("--version", std::string(BELAB_VERSION));
  app.require_subcommand(1);

  Flags flags;
  const struct {
    const char* name;
    const char* help;
    Scenario scenario;
  } commands[] = {
      {"rate", "Kolmogorov distance sweep over n with a log-log rate fit", Scenario::kRate},
      {"certify", "certify or refute the lattice condition per n", Scenario::kCertify},
      {"esseen", "exact distance against smoothing and classical bounds", Scenario::kEsseen},
      {"sphere-tails", "tail curves of deviation statistics over random directions",
       Scenario::kSphereTails},
      {"check-lemmas", "property oracles for the supporting inequalities",
       Scenario::kCheckLemmas},
  };
  std::optional<Scenario> chosen;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_flags(sub, flags);
    sub->callback([&chosen, s = c.scenario] { chosen = s; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  ExperimentConfig config;
  try {
    config = flags.config.empty() ? default_config(*chosen)
                                  : load_config(flags.config, *chosen);
    if (const char* env = std::getenv("BELAB_OUT_DIR"); env && *env) config.output_dir = env;
    if (!flags.out.empty()) config.output_dir = flags.out;
    if (flags.seed) config.seed = *flags.seed;
    if (flags.budget) config.atom_budget = static_cast<std::size_t>(*flags.budget);
    if (flags.threads) config.threads = *flags.threads;
    validate(config);
  } catch (const belab::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return run(config, std::cerr);
}
