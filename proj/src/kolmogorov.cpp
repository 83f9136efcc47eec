// SPDX-License-Identifier: Apache-2.0
#include "belab/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "belab/errors.hpp"
#include "belab/format.hpp"
#include "belab/numeric.hpp"
#include "belab/parallel.hpp"
#include "belab/rng.hpp"

namespace belab {

namespace {

constexpr std::size_t kMcChunk = 8192;

// Sup gap of a step CDF given by sorted support points and the cumulative
// mass just before/after each of them.
struct ScanState {
  double sup = 0.0;
  void visit(double t, double before, double after) noexcept {
    const double phi = normal_cdf(t);
    sup = std::max({sup, std::abs(after - phi), std::abs(before - phi)});
  }
};

}  // namespace

std::string_view method_name(DistanceMethod method) noexcept {
  return method == DistanceMethod::kExact ? "exact" : "monte_carlo";
}

nlohmann::json to_json(const KolmogorovEstimate& est) {
  nlohmann::json j;
  j["value"] = est.value;
  j["interval_bound"] = est.interval_bound();
  j["method"] = method_name(est.method);
  j["confidence_radius"] = est.confidence_radius;
  j["sample_count"] = est.sample_count;
  if (est.method == DistanceMethod::kMonteCarlo) j["seed"] = est.seed;
  return j;
}

double normal_cdf(double t) noexcept {
  return 0.5 * std::erfc(-t / kSqrt2);
}

DiscreteLaw weighted_sum_law(const CoefficientVector& theta,
                             const DiscreteLaw& law, std::size_t atom_budget) {
  std::vector<double> active;
  for (double c : theta.coords()) {
    if (c != 0.0) active.push_back(c);
  }
  const double required =
      std::pow(static_cast<double>(law.size()), static_cast<double>(active.size()));
  if (required > static_cast<double>(atom_budget)) {
    throw BudgetExceeded("exact enumeration needs " + format_double(required) +
                             " atoms, budget is " + std::to_string(atom_budget),
                         required);
  }
  const auto atoms = law.atoms();
  DiscreteLaw current = DiscreteLaw::point_mass(0.0);
  for (double c : active) {
    const auto prev = current.atoms();
    std::vector<Atom> next(prev.size() * atoms.size());
    // Slot layout is fixed by (atom, prev index), independent of workers.
    parallel_for(atoms.size(), [&](std::size_t a) {
      const double shift = c * atoms[a].value;
      const double w = atoms[a].weight;
      Atom* out = next.data() + a * prev.size();
      for (std::size_t i = 0; i < prev.size(); ++i) {
        out[i] = {prev[i].value + shift, prev[i].weight * w};
      }
    });
    current = DiscreteLaw::normalized(std::move(next));
  }
  return current;
}

double kolmogorov_distance(const DiscreteLaw& law) noexcept {
  ScanState scan;
  CompensatedSum cumulative;
  for (const auto& a : law.atoms()) {
    const double before = cumulative.value();
    cumulative.add(a.weight);
    scan.visit(a.value, before, cumulative.value());
  }
  return scan.sup;
}

KolmogorovEstimate exact_distance(const CoefficientVector& theta,
                                  const DiscreteLaw& law,
                                  std::size_t atom_budget) {
  KolmogorovEstimate est;
  est.value = kolmogorov_distance(weighted_sum_law(theta, law, atom_budget));
  est.method = DistanceMethod::kExact;
  return est;
}

double dkw_radius(std::size_t m, double alpha) noexcept {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
}

KolmogorovEstimate mc_distance(const CoefficientVector& theta,
                               const DiscreteLaw& law, std::size_t m,
                               double alpha, std::uint64_t seed) {
  if (m < 1000) throw PreconditionViolated("mc_distance needs m >= 1000");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw PreconditionViolated("alpha must lie in (0, 1)");
  }
  const auto atoms = law.atoms();
  std::vector<double> cdf(atoms.size());
  {
    CompensatedSum acc;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      acc.add(atoms[k].weight);
      cdf[k] = acc.value();
    }
    cdf.back() = 1.0;
  }
  std::vector<double> active;
  for (double c : theta.coords()) {
    if (c != 0.0) active.push_back(c);
  }

  std::vector<double> samples(m);
  const std::size_t chunks = (m + kMcChunk - 1) / kMcChunk;
  parallel_for(chunks, [&](std::size_t chunk) {
    CounterRng rng(seed, chunk);
    const std::size_t lo = chunk * kMcChunk;
    const std::size_t hi = std::min(m, lo + kMcChunk);
    for (std::size_t s = lo; s < hi; ++s) {
      double sum = 0.0;
      for (double c : active) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t k = std::min<std::size_t>(it - cdf.begin(), atoms.size() - 1);
        sum += c * atoms[k].value;
      }
      samples[s] = sum;
    }
  });
  std::sort(samples.begin(), samples.end());

  ScanState scan;
  const double inv_m = 1.0 / static_cast<double>(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i + 1;
    while (j < m && samples[j] == samples[i]) ++j;
    scan.visit(samples[i], static_cast<double>(i) * inv_m,
               static_cast<double>(j) * inv_m);
    i = j;
  }

  KolmogorovEstimate est;
  est.value = scan.sup;
  est.method = DistanceMethod::kMonteCarlo;
  est.confidence_radius = dkw_radius(m, alpha);
  est.sample_count = m;
  est.seed = seed;
  return est;
}

double classical_be_bound(const MomentProfile& moment, std::size_t n,
                          double constant) {
  if (n == 0) throw PreconditionViolated("n must be >= 1");
  if (!(constant > 0.0)) throw PreconditionViolated("constant must be positive");
  return constant * moment.gamma_bar3 / std::sqrt(static_cast<double>(n));
}

double classical_be_bound(const MomentProfile& moment, const CoefficientVector& theta,
                          double constant) {
  if (!(constant > 0.0)) throw PreconditionViolated("constant must be positive");
  CompensatedSum cubes;
  for (double t : theta.coords()) cubes.add(std::abs(t * t * t));
  return constant * moment.gamma_bar3 * cubes.value();
}

void write_cdf_csv(std::ostream& out, const DiscreteLaw& law) {
  out << "t,F,Phi,gap\n";
  CompensatedSum cumulative;
  for (const auto& a : law.atoms()) {
    cumulative.add(a.weight);
    const double f = cumulative.value();
    const double phi = normal_cdf(a.value);
    out << format_double(a.value) << ',' << format_double(f) << ',' << format_double(phi) << ','
        << format_double(f - phi) << '\n';
  }
}

}  // namespace belab
