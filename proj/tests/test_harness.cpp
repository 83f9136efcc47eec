#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "belab/errors.hpp"
#include "belab/harness/config.hpp"
#include "belab/harness/run.hpp"
#include "doctest.h"

using namespace belab;
using namespace belab::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() /
                   ("belab-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_quiet(const ExperimentConfig& c) {
  std::ostringstream log;
  return run(c, log);
}

ExperimentConfig parse(const char* text, Scenario s) { return parse_config(json::parse(text), s); }

void check_csv_shape(const fs::path& p) {
  const auto body = slurp(p);
  REQUIRE_FALSE(body.empty());
  CHECK(body[0] != '#');
  CHECK(body.find("# config_digest: ") != std::string::npos);
  CHECK(body.find("# belab_version: ") != std::string::npos);
  CHECK(body.find("# seed: ") != std::string::npos);
  // Metadata trails the data rows.
  const auto last_data = body.rfind("\n", body.find("\n#"));
  CHECK(body.find('#') > last_data);
}

}  // namespace

TEST_CASE("fit_rate") {
  std::vector<std::pair<std::size_t, double>> inv;
  std::vector<std::pair<std::size_t, double>> root;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    inv.emplace_back(n, 3.0 / double(n));
    root.emplace_back(n, 0.5 / std::sqrt(double(n)));
  }
  const auto a = fit_rate(inv);
  CHECK(a.slope == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(a.r_squared == doctest::Approx(1.0));
  CHECK(a.intercept == doctest::Approx(std::log(3.0)));
  CHECK(fit_rate(root).slope == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(a.points.size() == 4);

  using P = std::vector<std::pair<std::size_t, double>>;
  CHECK_THROWS_AS(fit_rate(P{{4, 0.1}, {4, 0.2}, {4, 0.3}}), DegenerateFit);
  CHECK_THROWS_AS(fit_rate(P{{4, 0.1}, {8, 0.2}}), DegenerateFit);
  CHECK_THROWS_AS(fit_rate(P{{4, 0.1}, {8, 0.0}, {16, 0.3}}), DegenerateFit);
}

TEST_CASE("config parsing") {
  const auto c = parse(R"j({"spec_version": 1, "law": "bernoulli(0.25)",
                           "theta": {"random": 7}, "n": [5, 6], "seed": 11,
                           "mc": {"m": 5000, "alpha": 0.1}})j",
                       Scenario::kRate);
  CHECK(c.law.is_standardized());
  CHECK(c.theta.kind == ThetaSpec::Kind::kRandom);
  CHECK(c.n_values == std::vector<std::size_t>{5, 6});
  CHECK(c.seed == 11);
  CHECK(c.mc_samples == 5000);
  CHECK(c.theta.build(5).size() == 5);
  CHECK(c.theta.build(5).digest() == c.theta.build(5).digest());

  const auto atoms = parse(R"j({"spec_version": 1, "law": {"atoms": [[0, 3], [1, 1]]}})j",
                           Scenario::kEsseen);
  CHECK(atoms.law.is_standardized());
  CHECK(atoms.law.atoms()[1].value == doctest::Approx(std::sqrt(3.0)));

  const char* bad[] = {
      R"j({"n": [8]})j",
      R"j({"spec_version": 2})j",
      R"j({"spec_version": 1, "theta": "theta0", "n": [6]})j",
      R"j({"spec_version": 1, "n": []})j",
      R"j({"spec_version": 1, "law": "cauchy"})j",
      R"j({"spec_version": 1, "law": "point(0)"})j",
      R"j({"spec_version": 1, "colour": "red"})j",
      R"j({"spec_version": 1, "scenario": "certify"})j",
      R"j({"spec_version": 1, "theta": {"explicit": [1, 2]}, "n": [3]})j",
      R"j({"spec_version": 1, "rate": {"estimator": "exact"}, "n": [40]})j",
      R"j({"spec_version": 1, "mc": {"m": 10}})j",
      R"j({"spec_version": 1, "n": [-3]})j",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse(text, Scenario::kRate), ConfigError);
  }
}

TEST_CASE("config digest ignores threads and output location") {
  auto a = default_config(Scenario::kRate);
  auto b = a;
  b.threads = 8;
  b.output_dir = "elsewhere";
  CHECK(a.digest() == b.digest());
  b.seed = 2;
  CHECK(a.digest() != b.digest());
  CHECK(a.digest().size() == 16);
}

TEST_CASE("rate scenario") {
  auto c = default_config(Scenario::kRate);
  c.output_dir = scratch("rate");
  c.slope_max = -0.8;
  CHECK(run_quiet(c) == kExitOk);
  check_csv_shape(c.output_dir / "rate.csv");
  const auto body = slurp(c.output_dir / "rate.csv");
  CHECK(std::count(body.begin(), body.end(), '\n') >= 6);
  const auto fit = json::parse(slurp(c.output_dir / "rate_fit.json"));
  CHECK(fit["fit"]["slope"].get<double>() <= -0.8);

  c.slope_max = -2.0;
  CHECK(run_quiet(c) == kExitAssertion);
}

TEST_CASE("rate scenario refuses noisy Monte Carlo fits") {
  auto c = default_config(Scenario::kRate);
  c.output_dir = scratch("noisy");
  c.estimator = Estimator::kMonteCarlo;
  c.mc_samples = 2000;
  std::ostringstream log;
  CHECK(run(c, log) == kExitBudget);
  CHECK(log.str().find("raise mc.m") != std::string::npos);

  c.theta.kind = ThetaSpec::Kind::kUniform;
  c.n_values = {40, 60, 80};
  c.mc_samples = 200'000;
  c.output_dir = scratch("mc-ok");
  CHECK(run_quiet(c) == kExitOk);
  CHECK(slurp(c.output_dir / "rate.csv").find("monte_carlo") != std::string::npos);
}

TEST_CASE("certify scenario") {
  auto c = parse(R"j({"spec_version": 1, "theta": "uniform", "n": [16],
                     "certify": {"expect": "refuted"}})j",
                 Scenario::kCertify);
  c.output_dir = scratch("certify");
  CHECK(run_quiet(c) == kExitOk);
  const auto out = json::parse(slurp(c.output_dir / "certify.json"));
  const auto& cert = out["rows"][0]["certificate"];
  CHECK(cert["outcome"] == "refuted");
  CHECK(cert["counterexample_xi"].get<double>() == 4.0);
  check_csv_shape(c.output_dir / "certify.csv");

  c.expect_outcome = "certified";
  CHECK(run_quiet(c) == kExitAssertion);
}

TEST_CASE("esseen scenario") {
  auto c = parse(R"j({"spec_version": 1, "theta": {"explicit": [1, 1]}, "n": [2]})j",
                 Scenario::kEsseen);
  c.output_dir = scratch("esseen");
  CHECK(run_quiet(c) == kExitOk);
  const auto out = json::parse(slurp(c.output_dir / "esseen.json"));
  const auto& row = out["rows"][0];
  CHECK(row["exact"]["value"].get<double>() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(row["esseen_bound"].get<double>() >= 0.25);
  CHECK(row.contains("regime"));
  check_csv_shape(c.output_dir / "esseen.csv");

  c = default_config(Scenario::kEsseen);
  c.n_values = {30};
  c.atom_budget = 1 << 20;
  c.output_dir = scratch("esseen-budget");
  CHECK(run_quiet(c) == kExitBudget);
}

TEST_CASE("sphere-tails and check-lemmas scenarios") {
  auto c = default_config(Scenario::kSphereTails);
  c.tail_samples = 20'000;
  c.n_values = {16};
  c.quantile_n = {6};
  c.quantile_directions = 20;
  c.output_dir = scratch("tails");
  const int code = run_quiet(c);
  CHECK((code == kExitOk || code == kExitAssertion));
  check_csv_shape(c.output_dir / "sphere_tails_n16.csv");
  check_csv_shape(c.output_dir / "sphere_quantiles.csv");

  auto l = default_config(Scenario::kCheckLemmas);
  l.lemma_trials = 30;
  l.output_dir = scratch("lemmas");
  CHECK(run_quiet(l) == kExitOk);
  const auto out = json::parse(slurp(l.output_dir / "check_lemmas.json"));
  CHECK(out["rows"].size() >= 10);
}

TEST_CASE("outputs are identical across thread counts") {
  for (Scenario s : {Scenario::kRate, Scenario::kCertify, Scenario::kCheckLemmas}) {
    auto c = default_config(s);
    c.lemma_trials = 20;
    const auto serial = scratch("threads-1");
    c.output_dir = serial;
    c.threads = 1;
    REQUIRE(run_quiet(c) == kExitOk);
    c.output_dir = scratch("threads-8");
    c.threads = 8;
    REQUIRE(run_quiet(c) == kExitOk);
    for (const auto& entry : fs::directory_iterator(serial)) {
      const auto other = c.output_dir / entry.path().filename();
      CHECK(slurp(entry.path()) == slurp(other));
    }
  }
}

#ifdef BELAB_CLI
TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const std::string cli = BELAB_CLI;
  auto code = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(code(cli + " --help") == 0);
  CHECK(code(cli) == kExitConfig);
  CHECK(code(cli + " rate --threads 0") == kExitConfig);
  {
    std::ofstream(dir / "bad.json") << R"j({"spec_version": 3})j";
  }
  CHECK(code(cli + " rate --config " + (dir / "bad.json").string()) == kExitConfig);
  {
    std::ofstream(dir / "big.json") << R"j({"spec_version": 1, "theta": "uniform", "n": [30]})j";
  }
  CHECK(code(cli + " esseen --budget 1000 --config " + (dir / "big.json").string() +
             " --out " + (dir / "big").string()) == kExitBudget);
  CHECK(code(cli + " rate --out " + (dir / "rate").string()) == kExitOk);
  CHECK(fs::exists(dir / "rate" / "rate.csv"));
  CHECK(code("BELAB_OUT_DIR=" + (dir / "env").string() + " " + cli + " certify") == kExitOk);
  CHECK(fs::exists(dir / "env" / "certify.csv"));
}
#endif
