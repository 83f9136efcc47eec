// SPDX-License-Identifier: Apache-2.0
#include "belab/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "belab/errors.hpp"
#include "belab/sphere.hpp"

namespace belab::harness {

namespace {

using nlohmann::json;

constexpr int kSpecVersion = 1;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
T get_as(const json& node, const char* key) {
  try {
    return node.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

std::uint64_t get_u64(const json& node, const char* key) {
  if (!node.is_number_unsigned()) {
    throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return node.get<std::uint64_t>();
}

double get_positive(const json& node, const char* key) {
  if (!node.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  const double v = node.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("field '") + key + "' must be positive");
  }
  return v;
}

std::vector<std::size_t> get_sizes(const json& node, const char* key) {
  if (!node.is_array()) throw ConfigError(std::string("field '") + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& v : node) out.push_back(get_u64(v, key));
  return out;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown field '" + key + "' in " + where);
  }
}

DiscreteLaw parse_law(const json& node, std::string& description) {
  if (node.is_string()) {
    description = node.get<std::string>();
    DiscreteLaw law = DiscreteLaw::rademacher();
    try {
      law = parse_law_preset(description);
    } catch (const Error& e) {
      throw ConfigError(std::string("law: ") + e.what());
    }
    if (!law.is_standardized()) {
      throw ConfigError("law '" + description + "' cannot be standardized");
    }
    return law;
  }
  if (node.is_object() && node.contains("atoms")) {
    reject_unknown(node, {"atoms"}, "law");
    std::vector<Atom> atoms;
    for (const auto& a : node["atoms"]) {
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        throw ConfigError("law atoms must be [value, weight] pairs");
      }
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    try {
      const auto law = standardize(DiscreteLaw::normalized(std::move(atoms)));
      description = "atoms";
      return law;
    } catch (const Error& e) {
      throw ConfigError(std::string("law: ") + e.what());
    }
  }
  throw ConfigError("law must be a preset string or {\"atoms\": [[v, w], ...]}");
}

ThetaSpec parse_theta(const json& node) {
  ThetaSpec spec;
  if (node.is_string()) {
    const auto name = node.get<std::string>();
    if (name == "uniform") {
      spec.kind = ThetaSpec::Kind::kUniform;
    } else if (name == "theta0") {
      spec.kind = ThetaSpec::Kind::kTheta0;
    } else {
      throw ConfigError("unknown theta '" + name + "'");
    }
    return spec;
  }
  if (node.is_object() && node.size() == 1) {
    if (node.contains("random")) {
      spec.kind = ThetaSpec::Kind::kRandom;
      spec.seed = get_u64(node["random"], "theta.random");
      return spec;
    }
    if (node.contains("explicit")) {
      spec.kind = ThetaSpec::Kind::kExplicit;
      spec.coords = get_as<std::vector<double>>(node["explicit"], "theta.explicit");
      if (spec.coords.empty()) throw ConfigError("theta.explicit is empty");
      return spec;
    }
  }
  throw ConfigError(
      "theta must be \"uniform\", \"theta0\", {\"random\": seed} or {\"explicit\": [...]}");
}

json theta_json(const ThetaSpec& spec) {
  switch (spec.kind) {
    case ThetaSpec::Kind::kUniform: return "uniform";
    case ThetaSpec::Kind::kTheta0: return "theta0";
    case ThetaSpec::Kind::kRandom: return json{{"random", spec.seed}};
    case ThetaSpec::Kind::kExplicit: return json{{"explicit", spec.coords}};
  }
  return nullptr;
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kAuto: return "auto";
    case Estimator::kExact: return "exact";
    case Estimator::kMonteCarlo: return "mc";
  }
  return "?";
}

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::kRate: return "rate";
    case Scenario::kCertify: return "certify";
    case Scenario::kEsseen: return "esseen";
    case Scenario::kSphereTails: return "sphere-tails";
    case Scenario::kCheckLemmas: return "check-lemmas";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
  for (auto s : {Scenario::kRate, Scenario::kCertify, Scenario::kEsseen,
                 Scenario::kSphereTails, Scenario::kCheckLemmas}) {
    if (scenario_name(s) == name) return s;
  }
  return std::nullopt;
}

CoefficientVector ThetaSpec::build(std::size_t n) const {
  switch (kind) {
    case Kind::kUniform: return CoefficientVector::uniform(n);
    case Kind::kTheta0: return theta_zero(n);
    case Kind::kRandom: {
      CounterRng rng(seed, n);
      return sample_direction(n, rng);
    }
    case Kind::kExplicit:
      if (coords.size() != n) {
        throw ConfigError("explicit theta has " + std::to_string(coords.size()) +
                          " coordinates but n = " + std::to_string(n));
      }
      return CoefficientVector::normalized(coords);
  }
  throw ConfigError("bad theta kind");
}

std::string ThetaSpec::describe() const { return theta_json(*this).dump(); }

ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  switch (scenario) {
    case Scenario::kRate:
      c.theta.kind = ThetaSpec::Kind::kTheta0;
      c.n_values = {8, 12, 16, 20, 24};
      break;
    case Scenario::kCertify:
      c.theta.kind = ThetaSpec::Kind::kTheta0;
      c.n_values = {8, 16, 32, 64};
      break;
    case Scenario::kEsseen:
      c.theta.kind = ThetaSpec::Kind::kUniform;
      c.n_values = {4, 8, 12};
      break;
    case Scenario::kSphereTails:
      c.law_description = "bernoulli(0.25)";
      c.law = parse_law_preset(c.law_description);
      c.n_values = {32};
      break;
    case Scenario::kCheckLemmas:
      c.n_values = {8};
      break;
  }
  return c;
}

ExperimentConfig parse_config(const json& doc, Scenario scenario) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("spec_version")) throw ConfigError("missing spec_version");
  if (!doc["spec_version"].is_number_integer() ||
      doc["spec_version"].get<int>() != kSpecVersion) {
    throw ConfigError("unsupported spec_version (expected 1)");
  }
  if (doc.contains("scenario")) {
    const auto name = get_as<std::string>(doc["scenario"], "scenario");
    const auto parsed = parse_scenario(name);
    if (!parsed) throw ConfigError("unknown scenario '" + name + "'");
    if (*parsed != scenario) {
      throw ConfigError("config is for scenario '" + name + "' but '" +
                        std::string(scenario_name(scenario)) + "' was requested");
    }
  }
  reject_unknown(doc,
                 {"spec_version", "scenario", "law", "theta", "n", "budget", "seed",
                  "output", "threads", "mc", "rate", "certify", "esseen", "sphere",
                  "lemmas"},
                 "config");

  ExperimentConfig c = default_config(scenario);
  if (doc.contains("law")) c.law = parse_law(doc["law"], c.law_description);
  if (doc.contains("theta")) c.theta = parse_theta(doc["theta"]);
  if (doc.contains("n")) c.n_values = get_sizes(doc["n"], "n");
  if (doc.contains("budget")) c.atom_budget = get_u64(doc["budget"], "budget");
  if (doc.contains("seed")) c.seed = get_u64(doc["seed"], "seed");
  if (doc.contains("output")) c.output_dir = get_as<std::string>(doc["output"], "output");
  if (doc.contains("threads")) {
    c.threads = static_cast<unsigned>(get_u64(doc["threads"], "threads"));
  }
  if (doc.contains("mc")) {
    const auto& mc = doc["mc"];
    reject_unknown(mc, {"m", "alpha"}, "mc");
    if (mc.contains("m")) c.mc_samples = get_u64(mc["m"], "mc.m");
    if (mc.contains("alpha")) c.mc_alpha = get_positive(mc["alpha"], "mc.alpha");
  }
  if (doc.contains("rate")) {
    const auto& r = doc["rate"];
    reject_unknown(r, {"estimator", "slope_min", "slope_max"}, "rate");
    if (r.contains("estimator")) {
      const auto e = get_as<std::string>(r["estimator"], "rate.estimator");
      if (e == "auto") {
        c.estimator = Estimator::kAuto;
      } else if (e == "exact") {
        c.estimator = Estimator::kExact;
      } else if (e == "mc") {
        c.estimator = Estimator::kMonteCarlo;
      } else {
        throw ConfigError("rate.estimator must be auto, exact or mc");
      }
    }
    if (r.contains("slope_min")) c.slope_min = get_as<double>(r["slope_min"], "rate.slope_min");
    if (r.contains("slope_max")) c.slope_max = get_as<double>(r["slope_max"], "rate.slope_max");
  }
  if (doc.contains("certify")) {
    const auto& r = doc["certify"];
    reject_unknown(r, {"grid_step", "r_tol", "R", "expect"}, "certify");
    if (r.contains("grid_step")) c.grid_step = get_positive(r["grid_step"], "certify.grid_step");
    if (r.contains("r_tol")) c.r_tol = get_positive(r["r_tol"], "certify.r_tol");
    if (r.contains("R")) c.certify_r = get_positive(r["R"], "certify.R");
    if (r.contains("expect")) c.expect_outcome = get_as<std::string>(r["expect"], "certify.expect");
  }
  if (doc.contains("esseen")) {
    const auto& r = doc["esseen"];
    reject_unknown(r, {"T", "be_constant", "middle_constant"}, "esseen");
    if (r.contains("T")) c.esseen_cutoffs = get_as<std::vector<double>>(r["T"], "esseen.T");
    if (r.contains("be_constant")) {
      c.be_constant = get_positive(r["be_constant"], "esseen.be_constant");
    }
    if (r.contains("middle_constant")) {
      c.middle_constant = get_positive(r["middle_constant"], "esseen.middle_constant");
    }
  }
  if (doc.contains("sphere")) {
    const auto& r = doc["sphere"];
    reject_unknown(r, {"samples", "t_step", "fit_t_min", "min_r_squared",
                       "quantile_directions", "quantile_n"},
                   "sphere");
    if (r.contains("samples")) c.tail_samples = get_u64(r["samples"], "sphere.samples");
    if (r.contains("t_step")) c.tail_t_step = get_positive(r["t_step"], "sphere.t_step");
    if (r.contains("fit_t_min")) c.tail_t_min = get_positive(r["fit_t_min"], "sphere.fit_t_min");
    if (r.contains("min_r_squared")) {
      c.tail_min_r_squared = get_as<double>(r["min_r_squared"], "sphere.min_r_squared");
    }
    if (r.contains("quantile_directions")) {
      c.quantile_directions = get_u64(r["quantile_directions"], "sphere.quantile_directions");
    }
    if (r.contains("quantile_n")) c.quantile_n = get_sizes(r["quantile_n"], "sphere.quantile_n");
  }
  if (doc.contains("lemmas")) {
    const auto& r = doc["lemmas"];
    reject_unknown(r, {"trials"}, "lemmas");
    if (r.contains("trials")) c.lemma_trials = get_u64(r["trials"], "lemmas.trials");
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, Scenario scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, scenario);
}

void validate(const ExperimentConfig& c) {
  if (c.n_values.empty()) throw ConfigError("n list is empty");
  for (std::size_t n : c.n_values) {
    if (n == 0) throw ConfigError("n must be positive");
    if (c.theta.kind == ThetaSpec::Kind::kTheta0 && n % 4 != 0) {
      throw ConfigError("theta0 requires n divisible by 4, got " + std::to_string(n));
    }
    if (c.theta.kind == ThetaSpec::Kind::kExplicit && c.theta.coords.size() != n) {
      throw ConfigError("explicit theta length does not match n = " + std::to_string(n));
    }
  }
  if (c.atom_budget == 0) throw ConfigError("budget must be positive");
  if (c.estimator == Estimator::kExact) {
    const double k = static_cast<double>(c.law.size());
    for (std::size_t n : c.n_values) {
      if (std::pow(k, static_cast<double>(n)) > static_cast<double>(c.atom_budget)) {
        throw ConfigError("n = " + std::to_string(n) +
                          " exceeds the atom budget for exact mode");
      }
    }
  }
  if (c.scenario == Scenario::kEsseen) {
    if (c.esseen_cutoffs.empty()) throw ConfigError("esseen.T is empty");
    for (double t : c.esseen_cutoffs) {
      if (!(t > 0.0)) throw ConfigError("esseen.T entries must be positive");
    }
  }
  if (c.mc_samples < 1000) throw ConfigError("mc.m must be at least 1000");
  if (!(c.mc_alpha < 1.0)) throw ConfigError("mc.alpha must lie in (0, 1)");
  if (c.grid_step > 1e-2) throw ConfigError("certify.grid_step must be at most 1e-2");
  if (c.certify_r && *c.certify_r < 1.0) throw ConfigError("certify.R must be >= 1");
  if (c.expect_outcome && *c.expect_outcome != "certified" &&
      *c.expect_outcome != "refuted" && *c.expect_outcome != "inconclusive") {
    throw ConfigError("certify.expect must be certified, refuted or inconclusive");
  }
  if (c.tail_samples < 10'000) throw ConfigError("sphere.samples must be at least 10000");
  if (c.scenario == Scenario::kSphereTails) {
    for (std::size_t n : c.n_values) {
      if (n < 2) throw ConfigError("sphere-tails needs n >= 2");
    }
  }
  if (c.lemma_trials == 0) throw ConfigError("lemmas.trials must be positive");
}

json ExperimentConfig::canonical() const {
  json j;
  j["spec_version"] = kSpecVersion;
  j["scenario"] = scenario_name(scenario);
  j["law"] = law_description;
  json atoms = json::array();
  for (const auto& a : law.atoms()) atoms.push_back({a.value, a.weight});
  j["law_atoms"] = atoms;
  j["theta"] = theta_json(theta);
  j["n"] = n_values;
  j["budget"] = atom_budget;
  j["seed"] = seed;
  j["rate"] = {{"estimator", estimator_name(estimator)},
               {"slope_min", optional_json(slope_min)},
               {"slope_max", optional_json(slope_max)}};
  j["mc"] = {{"m", mc_samples}, {"alpha", mc_alpha}};
  j["certify"] = {{"grid_step", grid_step},
                  {"r_tol", r_tol},
                  {"R", optional_json(certify_r)},
                  {"expect", optional_json(expect_outcome)}};
  j["esseen"] = {{"T", esseen_cutoffs},
                 {"be_constant", be_constant},
                 {"middle_constant", middle_constant}};
  j["sphere"] = {{"samples", tail_samples},
                 {"t_step", tail_t_step},
                 {"fit_t_min", tail_t_min},
                 {"min_r_squared", optional_json(tail_min_r_squared)},
                 {"quantile_directions", quantile_directions},
                 {"quantile_n", quantile_n}};
  j["lemmas"] = {{"trials", lemma_trials}};
  return j;
}

std::string ExperimentConfig::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical().dump())));
  return buf;
}

}  // namespace belab::harness
