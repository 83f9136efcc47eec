// SPDX-License-Identifier: Apache-2.0
#include "belab/harness/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "belab/arithmetic.hpp"
#include "belab/charfun.hpp"
#include "belab/errors.hpp"
#include "belab/format.hpp"
#include "belab/harness/lemmas.hpp"
#include "belab/kolmogorov.hpp"
#include "belab/numeric.hpp"
#include "belab/parallel.hpp"
#include "belab/sphere.hpp"

namespace belab::harness {

namespace {

using nlohmann::json;

constexpr double kSnrLimit = 0.25;
constexpr double kEsseenSlack = 1e-8;

std::string fmt(double x) { return format_double(x); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Output {
 public:
  Output(const ExperimentConfig& config) : config_(config) {
    std::filesystem::create_directories(config.output_dir);
  }

  void csv(const std::string& name, const std::string& body,
           const std::vector<std::string>& notes = {}) const {
    std::ofstream out(path(name), std::ios::binary);
    out << body;
    for (const auto& n : notes) out << "# " << n << '\n';
    out << "# config_digest: " << config_.digest() << '\n'
        << "# belab_version: " << BELAB_VERSION << '\n'
        << "# spec_version: 1\n"
        << "# scenario: " << scenario_name(config_.scenario) << '\n'
        << "# law: " << config_.law_description << '\n'
        << "# theta: " << config_.theta.describe() << '\n'
        << "# seed: " << config_.seed << '\n';
    check(out, name);
  }

  void json_file(const std::string& name, json body) const {
    body["metadata"] = {{"config_digest", config_.digest()},
                        {"belab_version", BELAB_VERSION},
                        {"config", config_.canonical()}};
    std::ofstream out(path(name), std::ios::binary);
    out << body.dump(2) << '\n';
    check(out, name);
  }

 private:
  std::filesystem::path path(const std::string& name) const {
    return config_.output_dir / name;
  }
  void check(const std::ofstream& out, const std::string& name) const {
    if (!out) throw ConfigError("cannot write " + path(name).string());
  }
  const ExperimentConfig& config_;
};

std::uint64_t item_seed(std::uint64_t seed, std::uint64_t item) {
  return mix64(seed ^ mix64(item));
}

double atom_count(const DiscreteLaw& law, std::size_t n) {
  return std::pow(static_cast<double>(law.size()), static_cast<double>(n));
}

// ---------------------------------------------------------------- rate

int run_rate(const ExperimentConfig& c, const Output& out, std::ostream& log) {
  const auto profile = moments(c.law);
  std::ostringstream csv;
  csv << "n,distance,method,confidence_radius,interval_bound,classical_be,samples,seed\n";
  std::vector<std::pair<std::size_t, double>> points;
  bool noisy = false;
  double required_m = 0.0;
  for (std::size_t n : c.n_values) {
    const auto theta = c.theta.build(n);
    const bool exact =
        c.estimator == Estimator::kExact ||
        (c.estimator == Estimator::kAuto &&
         atom_count(c.law, n) <= static_cast<double>(c.atom_budget));
    const auto est = exact ? exact_distance(theta, c.law, c.atom_budget)
                           : mc_distance(theta, c.law, c.mc_samples, c.mc_alpha,
                                         item_seed(c.seed, n));
    csv << n << ',' << fmt(est.value) << ',' << method_name(est.method) << ','
        << fmt(est.confidence_radius) << ',' << fmt(est.interval_bound()) << ','
        << fmt(classical_be_bound(profile, theta, c.be_constant)) << ','
        << est.sample_count << ',' << est.seed << '\n';
    if (est.method == DistanceMethod::kMonteCarlo &&
        est.confidence_radius > kSnrLimit * est.value) {
      noisy = true;
      const double target = kSnrLimit * est.value;
      required_m = std::max(required_m,
                            std::log(2.0 / c.mc_alpha) / (2.0 * target * target));
    }
    points.emplace_back(n, est.value);
    log << "rate n=" << n << " distance=" << fmt(est.value) << " ("
        << method_name(est.method) << ")\n";
  }

  std::vector<std::string> notes;
  json summary;
  summary["rows"] = json::array();
  for (const auto& [n, d] : points) summary["rows"].push_back({{"n", n}, {"distance", d}});
  if (noisy) {
    notes.push_back("fit refused: Monte Carlo radius exceeds 0.25 x distance");
    out.csv("rate.csv", csv.str(), notes);
    summary["fit"] = nullptr;
    summary["refused"] = notes.back();
    out.json_file("rate_fit.json", summary);
    log << "Monte Carlo radius exceeds " << kSnrLimit
        << " x distance; raise mc.m to at least "
        << static_cast<std::uint64_t>(std::ceil(required_m))
        << " or lower n into the exact-enumeration budget\n";
    return kExitBudget;
  }
  if (points.size() < 3) {
    notes.push_back("no fit: fewer than three n values");
    out.csv("rate.csv", csv.str(), notes);
    summary["fit"] = nullptr;
    out.json_file("rate_fit.json", summary);
    log << "fewer than three n values; skipping the rate fit\n";
    return kExitOk;
  }
  const auto fit = fit_rate(points);
  notes.push_back("fit slope=" + fmt(fit.slope) + " intercept=" + fmt(fit.intercept) +
                  " r_squared=" + fmt(fit.r_squared));
  out.csv("rate.csv", csv.str(), notes);
  summary["fit"] = to_json(fit);
  out.json_file("rate_fit.json", summary);
  log << "rate fit slope=" << fmt(fit.slope) << " r2=" << fmt(fit.r_squared) << '\n';

  bool ok = true;
  if (c.slope_min && fit.slope < *c.slope_min) ok = false;
  if (c.slope_max && fit.slope > *c.slope_max) ok = false;
  if (!ok) log << "assertion failed: slope outside the configured window\n";
  return ok ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------- certify

int run_certify(const ExperimentConfig& c, const Output& out, std::ostream& log) {
  std::ostringstream csv;
  csv << "n,r_i,r_ii,r_upper,r_lower,R,outcome,margin,counterexample_xi,grid_points,"
         "theta_digest\n";
  json rows = json::array();
  bool ok = true;
  for (std::size_t n : c.n_values) {
    const auto theta = c.theta.build(n);
    const auto power = check_conditions_i_ii(theta);
    const double r0 = std::max({power.r_i, power.r_ii, 1.0});
    std::optional<CertifiedRange> range;
    double r = 0.0;
    if (c.certify_r) {
      r = *c.certify_r;
    } else {
      range = minimal_certified_r(theta, c.grid_step, c.r_tol);
      r = std::isfinite(range->r_upper) ? range->r_upper : r0;
    }
    const auto cert = certify_condition_iii(theta, r, c.grid_step);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    csv << n << ',' << fmt(power.r_i) << ',' << fmt(power.r_ii) << ','
        << fmt(range ? range->r_upper : nan) << ',' << fmt(range ? range->r_lower : nan)
        << ',' << fmt(cert.R) << ',' << outcome_name(cert.outcome) << ','
        << fmt(cert.margin) << ','
        << (cert.counterexample_xi ? fmt(*cert.counterexample_xi) : std::string())
        << ',' << cert.grid_points << ',' << cert.theta_digest << '\n';
    json row = {{"n", n}, {"r_i", power.r_i}, {"r_ii", power.r_ii},
                {"certificate", to_json(cert)}};
    if (range) {
      row["r_upper"] = std::isfinite(range->r_upper) ? json(range->r_upper) : json(nullptr);
      row["r_lower"] = range->r_lower;
    }
    rows.push_back(row);
    log << "certify n=" << n << " R=" << fmt(cert.R) << ' ' << outcome_name(cert.outcome);
    if (cert.counterexample_xi) log << " xi=" << fmt(*cert.counterexample_xi);
    log << '\n';
    if (c.expect_outcome && outcome_name(cert.outcome) != *c.expect_outcome) {
      log << "assertion failed: expected " << *c.expect_outcome << " at n=" << n << '\n';
      ok = false;
    }
  }
  out.csv("certify.csv", csv.str());
  out.json_file("certify.json", {{"rows", rows}});
  return ok ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------- esseen

int run_esseen(const ExperimentConfig& c, const Output& out, std::ostream& log) {
  const auto profile = moments(c.law);
  const std::vector<DiscreteLaw> laws{c.law};
  std::ostringstream csv;
  csv << "n,exact,esseen_bound,best_T,classical_be,epsilon,r1,r2_min,r2_reference,"
         "segment_inner,segment_middle,segment_outer\n";
  json rows = json::array();
  bool ok = true;
  for (std::size_t n : c.n_values) {
    const auto theta = c.theta.build(n);
    const auto exact = exact_distance(theta, c.law, c.atom_budget);
    const auto target = smoothing_target(theta, laws);
    std::vector<double> bounds(c.esseen_cutoffs.size());
    parallel_for(bounds.size(), [&](std::size_t i) {
      bounds[i] = esseen_bound(target, c.esseen_cutoffs[i]);
    });
    const auto best = std::min_element(bounds.begin(), bounds.end());
    const double best_t = c.esseen_cutoffs[static_cast<std::size_t>(best - bounds.begin())];
    const double be = classical_be_bound(profile, theta, c.be_constant);
    const auto report = regime_report(theta, laws, c.middle_constant);
    csv << n << ',' << fmt(exact.value) << ',' << fmt(*best) << ',' << fmt(best_t) << ','
        << fmt(be) << ',' << fmt(report.epsilon) << ',' << fmt(report.r1) << ','
        << fmt(report.r2_min) << ',' << fmt(report.r2_reference) << ','
        << fmt(report.segment_integrals[0]) << ',' << fmt(report.segment_integrals[1])
        << ',' << fmt(report.segment_integrals[2]) << '\n';
    json bound_rows = json::array();
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      bound_rows.push_back({{"T", c.esseen_cutoffs[i]}, {"bound", bounds[i]}});
    }
    rows.push_back({{"n", n},
                    {"exact", to_json(exact)},
                    {"esseen_bound", *best},
                    {"best_T", best_t},
                    {"sweep", bound_rows},
                    {"classical_be", be},
                    {"regime", to_json(report)}});
    log << "esseen n=" << n << " exact=" << fmt(exact.value) << " bound=" << fmt(*best)
        << " classical=" << fmt(be) << '\n';
    if (*best < exact.value - kEsseenSlack) {
      log << "assertion failed: esseen bound below the exact distance at n=" << n << '\n';
      ok = false;
    }
  }
  out.csv("esseen.csv", csv.str());
  out.json_file("esseen.json", {{"rows", rows}});
  return ok ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------- sphere-tails

// (1 - ρ)-quantiles of n·distance/δ⁴ over random directions.
void write_quantiles(const ExperimentConfig& c, const Output& out, std::ostream& log) {
  if (c.quantile_directions == 0 || c.quantile_n.empty()) return;
  const double delta4 = moments(c.law).delta4;
  const std::vector<double> rhos{0.5, 0.25, 0.1, 0.05, 0.02, 0.01};
  std::ostringstream csv;
  csv << "n,rho,log_sq_inv_rho,quantile,ratio\n";
  std::vector<std::string> notes;
  for (std::size_t n : c.quantile_n) {
    const double per_direction = atom_count(c.law, n);
    if (per_direction > static_cast<double>(c.atom_budget) ||
        per_direction * static_cast<double>(c.quantile_directions) > 0x1.0p28) {
      notes.push_back("quantiles skipped at n=" + std::to_string(n) + ": over budget");
      continue;
    }
    std::vector<double> scaled(c.quantile_directions);
    const CounterRng base(c.seed, 0x5155414eULL + n);
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      CounterRng rng = base.split(i);
      const auto theta = sample_direction(n, rng);
      scaled[i] = static_cast<double>(n) *
                  exact_distance(theta, c.law, c.atom_budget).value / delta4;
    }
    std::sort(scaled.begin(), scaled.end());
    for (double rho : rhos) {
      // Smallest sample exceeded by at most a fraction rho of the directions.
      const double pos = std::ceil((1.0 - rho) * static_cast<double>(scaled.size()));
      const std::size_t k = std::min(scaled.size() - 1,
                                     static_cast<std::size_t>(std::max(pos, 1.0)) - 1);
      const double l2 = std::log(1.0 / rho) * std::log(1.0 / rho);
      csv << n << ',' << fmt(rho) << ',' << fmt(l2) << ',' << fmt(scaled[k]) << ','
          << fmt(scaled[k] / l2) << '\n';
    }
    log << "quantiles n=" << n << " median=" << fmt(scaled[scaled.size() / 2]) << '\n';
  }
  notes.push_back("directions=" + std::to_string(c.quantile_directions));
  out.csv("sphere_quantiles.csv", csv.str(), notes);
}

json fit_json(const TailFit& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"points", fit.points}};
}

int run_sphere_tails(const ExperimentConfig& c, const Output& out, std::ostream& log) {
  const auto profile = moments(c.law);
  const std::vector<MomentProfile> profiles{profile};
  const bool asymmetric = std::abs(profile.gamma3) > 1e-12;
  TailOptions opts;
  opts.t_step = c.tail_t_step;
  opts.fit_t_min = c.tail_t_min;
  json rows = json::array();
  bool ok = true;
  auto fit_ok = [&](const TailFit& fit) {
    if (!(fit.slope > 0.0)) return false;
    return !c.tail_min_r_squared || fit.r_squared >= *c.tail_min_r_squared;
  };
  for (std::size_t n : c.n_values) {
    const auto table =
        deviation_tail_curves(profiles, n, c.tail_samples, item_seed(c.seed, n), opts);
    std::ostringstream csv;
    write_tail_csv(csv, table);
    out.csv("sphere_tails_n" + std::to_string(n) + ".csv", csv.str());
    rows.push_back({{"n", n},
                    {"samples", table.samples},
                    {"fit_t_min", table.fit_t_min},
                    {"skew_fit", fit_json(table.skew_fit)},
                    {"quartic_fit", fit_json(table.quartic_fit)}});
    log << "sphere-tails n=" << n << " quartic slope=" << fmt(table.quartic_fit.slope)
        << " r2=" << fmt(table.quartic_fit.r_squared)
        << " skew slope=" << fmt(table.skew_fit.slope)
        << " r2=" << fmt(table.skew_fit.r_squared) << '\n';
    if (!fit_ok(table.quartic_fit) || (asymmetric && !fit_ok(table.skew_fit))) {
      log << "assertion failed: tail fit at n=" << n << '\n';
      ok = false;
    }
  }
  write_quantiles(c, out, log);
  out.json_file("sphere_tails.json", {{"rows", rows}, {"asymmetric", asymmetric}});
  return ok ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------- check-lemmas

int run_check_lemmas(const ExperimentConfig& c, const Output& out, std::ostream& log) {
  const auto results = run_lemma_checks(c.seed, c.lemma_trials);
  std::ostringstream csv;
  csv << "check,passed,metric,threshold,trials,detail\n";
  json rows = json::array();
  bool ok = true;
  for (const auto& r : results) {
    csv << r.name << ',' << (r.passed ? "true" : "false") << ',' << fmt(r.metric) << ','
        << fmt(r.threshold) << ',' << r.trials << ',' << csv_field(r.detail) << '\n';
    rows.push_back({{"check", r.name},
                    {"passed", r.passed},
                    {"metric", r.metric},
                    {"threshold", r.threshold},
                    {"trials", r.trials},
                    {"detail", r.detail}});
    log << (r.passed ? "PASS " : "FAIL ") << r.name << " metric=" << fmt(r.metric) << '\n';
    ok = ok && r.passed;
  }
  out.csv("check_lemmas.csv", csv.str());
  out.json_file("check_lemmas.json", {{"rows", rows}});
  return ok ? kExitOk : kExitAssertion;
}

}  // namespace

RateFit fit_rate(std::span<const std::pair<std::size_t, double>> points) {
  if (points.size() < 3) throw DegenerateFit("rate fit needs at least three points");
  std::set<std::size_t> seen;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [n, d] : points) {
    if (n == 0) throw DegenerateFit("n must be positive");
    if (!(d > 0.0)) throw DegenerateFit("distances must be positive");
    if (!seen.insert(n).second) throw DegenerateFit("duplicate n in rate fit");
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(d));
  }
  const auto fit = least_squares(x, y);
  return {fit.slope, fit.intercept, fit.r_squared, {points.begin(), points.end()}};
}

json to_json(const RateFit& fit) {
  json points = json::array();
  for (const auto& [n, d] : fit.points) points.push_back({{"n", n}, {"distance", d}});
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"points", points}};
}

int run(const ExperimentConfig& config, std::ostream& log) {
  try {
    validate(config);
    set_thread_count(config.threads);
    const Output out(config);
    switch (config.scenario) {
      case Scenario::kRate: return run_rate(config, out, log);
      case Scenario::kCertify: return run_certify(config, out, log);
      case Scenario::kEsseen: return run_esseen(config, out, log);
      case Scenario::kSphereTails: return run_sphere_tails(config, out, log);
      case Scenario::kCheckLemmas: return run_check_lemmas(config, out, log);
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    log << "budget exceeded: " << e.what() << " (needs " << fmt(e.required())
        << " atoms; raise --budget or use the Monte Carlo estimator)\n";
    return kExitBudget;
  } catch (const QuadratureFailure& e) {
    log << "quadrature failure: " << e.what() << '\n';
    return kExitQuadrature;
  } catch (const DegenerateFit& e) {
    log << "degenerate fit: " << e.what() << '\n';
    return kExitAssertion;
  } catch (const Error& e) {
    log << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "output error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace belab::harness
