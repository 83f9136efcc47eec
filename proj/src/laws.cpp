// SPDX-License-Identifier: Apache-2.0
#include "belab/laws.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "belab/errors.hpp"
#include "belab/numeric.hpp"

namespace belab {

namespace {

std::vector<Atom> canonical_atoms(std::vector<Atom> atoms) {
  std::erase_if(atoms, [](const Atom& a) { return !(a.weight > 0.0); });
  // Sorting on (value, weight) fixes the summation order of merged runs.
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.value < b.value || (a.value == b.value && a.weight < b.weight);
  });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double start = atoms[i].value;
    std::size_t j = i + 1;
    while (j < atoms.size() && atoms[j].value - start <= kAtomMergeTol) ++j;
    if (j == i + 1) {
      merged.push_back(atoms[i]);
    } else {
      CompensatedSum mass;
      CompensatedSum moment;
      for (std::size_t k = i; k < j; ++k) {
        mass.add(atoms[k].weight);
        moment.add(atoms[k].weight * (atoms[k].value - start));
      }
      merged.push_back({start + moment.value() / mass.value(), mass.value()});
    }
    i = j;
  }
  return merged;
}

double total_mass(std::span<const Atom> atoms) noexcept {
  CompensatedSum acc;
  for (const auto& a : atoms) acc.add(a.weight);
  return acc.value();
}

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw PreconditionViolated("bad number in law preset: '" +
                               std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_args(std::string_view spec, std::string_view name) {
  spec.remove_prefix(name.size());
  if (spec.size() < 2 || spec.front() != '(' || spec.back() != ')') {
    throw PreconditionViolated("malformed law preset arguments: '" +
                               std::string(spec) + "'");
  }
  spec = spec.substr(1, spec.size() - 2);
  std::vector<double> out;
  while (true) {
    const auto comma = spec.find(',');
    out.push_back(parse_number(spec.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    spec.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

DiscreteLaw DiscreteLaw::from_atoms(std::vector<Atom> atoms) {
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value) || !std::isfinite(a.weight) || a.weight < 0.0 ||
        a.weight > 1.0) {
      throw PreconditionViolated("atom weights must lie in [0, 1]");
    }
  }
  if (std::abs(total_mass(atoms) - 1.0) > kLawTol) {
    throw PreconditionViolated("atom weights must sum to 1");
  }
  return DiscreteLaw(canonical_atoms(std::move(atoms)));
}

DiscreteLaw DiscreteLaw::normalized(std::vector<Atom> atoms) {
  auto canon = canonical_atoms(std::move(atoms));
  const double mass = total_mass(canon);
  if (!(mass > 0.0)) throw PreconditionViolated("law has no mass");
  for (auto& a : canon) a.weight /= mass;
  return DiscreteLaw(std::move(canon));
}

DiscreteLaw DiscreteLaw::point_mass(double value) {
  return DiscreteLaw({{value, 1.0}});
}

DiscreteLaw DiscreteLaw::rademacher() {
  return DiscreteLaw({{-1.0, 0.5}, {1.0, 0.5}});
}

DiscreteLaw DiscreteLaw::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw PreconditionViolated("bernoulli parameter must lie in (0, 1)");
  }
  return from_atoms({{0.0, 1.0 - p}, {1.0, p}});
}

DiscreteLaw DiscreteLaw::three_point(double a, double p) {
  if (!(p > 0.0 && p <= 0.5) || !(a > 0.0)) {
    throw PreconditionViolated("threepoint needs a > 0 and p in (0, 1/2]");
  }
  return from_atoms({{-1.0, p}, {0.0, 1.0 - 2.0 * p}, {a, p}});
}

double DiscreteLaw::mean() const noexcept {
  CompensatedSum acc;
  for (const auto& a : atoms_) acc.add(a.weight * a.value);
  return acc.value();
}

double DiscreteLaw::variance() const noexcept {
  const double mu = mean();
  CompensatedSum acc;
  for (const auto& a : atoms_) {
    const double d = a.value - mu;
    acc.add(a.weight * d * d);
  }
  return acc.value();
}

bool DiscreteLaw::is_standardized() const noexcept {
  return std::abs(mean()) <= kLawTol && std::abs(variance() - 1.0) <= kLawTol;
}

bool DiscreteLaw::is_symmetric(double tol) const noexcept {
  const std::size_t n = atoms_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& lo = atoms_[i];
    const Atom& hi = atoms_[n - 1 - i];
    if (std::abs(lo.value + hi.value) > tol ||
        std::abs(lo.weight - hi.weight) > kLawTol) {
      return false;
    }
  }
  return true;
}

double MomentProfile::gamma() const noexcept { return std::cbrt(gamma3); }
double MomentProfile::gamma_bar() const noexcept { return std::cbrt(gamma_bar3); }
double MomentProfile::delta() const noexcept {
  return std::sqrt(std::sqrt(delta4));
}

DiscreteLaw standardize(const DiscreteLaw& law) {
  const double var = law.variance();
  if (!(var > 1e-14)) {
    throw DegenerateLaw("cannot standardize a law with variance " +
                        std::to_string(var));
  }
  const double mu = law.mean();
  const double sd = std::sqrt(var);
  std::vector<Atom> atoms;
  atoms.reserve(law.size());
  for (const auto& a : law.atoms()) atoms.push_back({(a.value - mu) / sd, a.weight});
  return DiscreteLaw::normalized(std::move(atoms));
}

MomentProfile moments(const DiscreteLaw& law) {
  if (!law.is_standardized()) {
    throw PreconditionViolated("moments() requires a standardized law");
  }
  CompensatedSum m3;
  CompensatedSum a3;
  CompensatedSum m4;
  for (const auto& a : law.atoms()) {
    const double v2 = a.value * a.value;
    const double v3 = v2 * a.value;
    m3.add(a.weight * v3);
    a3.add(a.weight * std::abs(v3));
    m4.add(a.weight * v2 * v2);
  }
  return {m3.value(), a3.value(), m4.value()};
}

std::complex<double> charfun(const DiscreteLaw& law, double xi) noexcept {
  CompensatedSum re;
  CompensatedSum im;
  for (const auto& a : law.atoms()) {
    const double phase = xi * a.value;
    re.add(a.weight * std::cos(phase));
    im.add(-a.weight * std::sin(phase));
  }
  return {re.value(), im.value()};
}

DiscreteLaw symmetrize(const DiscreteLaw& law) {
  const auto atoms = law.atoms();
  std::vector<Atom> diffs;
  diffs.reserve(atoms.size() * atoms.size());
  for (const auto& x : atoms) {
    for (const auto& y : atoms) diffs.push_back({x.value - y.value, x.weight * y.weight});
  }
  return DiscreteLaw::normalized(std::move(diffs));
}

PaleyZygmundResult paley_zygmund_check(const DiscreteLaw& law, double M) {
  if (!(M >= 1.0)) throw PreconditionViolated("Paley-Zygmund needs M >= 1");
  CompensatedSum first;
  CompensatedSum second;
  for (const auto& a : law.atoms()) {
    if (a.value < 0.0) {
      throw PreconditionViolated("Paley-Zygmund needs a nonnegative law");
    }
    first.add(a.weight * a.value);
    second.add(a.weight * a.value * a.value);
  }
  if (std::abs(first.value() - 1.0) > kLawTol) {
    throw PreconditionViolated("Paley-Zygmund needs E Y = 1");
  }
  if (second.value() > M + kLawTol) {
    throw PreconditionViolated("Paley-Zygmund needs E Y^2 <= M");
  }
  CompensatedSum upper_mass;
  CompensatedSum truncated;
  for (const auto& a : law.atoms()) {
    if (a.value >= 0.5) upper_mass.add(a.weight);
    if (a.value <= 5.0 * M) truncated.add(a.weight * a.value);
  }
  return {upper_mass.value() >= 1.0 / (4.0 * M), truncated.value() >= 0.8};
}

DiscreteLaw parse_law_preset(std::string_view spec) {
  if (spec == "rademacher") return DiscreteLaw::rademacher();
  if (spec.starts_with("bernoulli")) {
    const auto args = parse_args(spec, "bernoulli");
    if (args.size() != 1) throw PreconditionViolated("bernoulli(p) takes one argument");
    return standardize(DiscreteLaw::bernoulli(args[0]));
  }
  if (spec.starts_with("threepoint")) {
    const auto args = parse_args(spec, "threepoint");
    if (args.size() != 2) {
      throw PreconditionViolated("threepoint(a,p) takes two arguments");
    }
    return standardize(DiscreteLaw::three_point(args[0], args[1]));
  }
  if (spec.starts_with("point")) {
    const auto args = parse_args(spec, "point");
    if (args.size() != 1) throw PreconditionViolated("point(a) takes one argument");
    return DiscreteLaw::point_mass(args[0]);
  }
  throw PreconditionViolated("unknown law preset '" + std::string(spec) + "'");
}

}  // namespace belab
