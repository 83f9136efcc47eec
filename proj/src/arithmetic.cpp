// SPDX-License-Identifier: Apache-2.0
#include "belab/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include "belab/errors.hpp"
#include "belab/numeric.hpp"
#include "belab/parallel.hpp"
#include "belab/simd/lattice_kernels.hpp"

namespace belab {

namespace {

constexpr std::size_t kGridBlock = 4096;
constexpr std::size_t kMaxGridPoints = std::size_t{1} << 28;

// 1/h when it is an integer, so that grid points i/K are correctly rounded.
std::optional<double> integral_inverse(double step) {
  const double inv = 1.0 / step;
  const double rounded = std::nearbyint(inv);
  if (rounded >= 1.0 && std::abs(inv - rounded) <= 1e-9 * rounded) return rounded;
  return std::nullopt;
}

std::size_t grid_count(double lo, double hi, double step) {
  const double count = std::floor(hi / step) - std::ceil(lo / step) + 1.0;
  if (count > static_cast<double>(kMaxGridPoints)) {
    throw PreconditionViolated("grid of " + std::to_string(count) +
                               " points exceeds the supported size");
  }
  return count > 0.0 ? static_cast<std::size_t>(count) : 0;
}

// Fills out[k] = Σ_j d²(ξ_k x_j, ℤ) in fixed-size blocks.
void evaluate_grid(std::span<const double> coords, std::span<const double> xs,
                   std::span<double> out) {
  const std::size_t blocks = (xs.size() + kGridBlock - 1) / kGridBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kGridBlock;
    const std::size_t len = std::min(kGridBlock, xs.size() - lo);
    simd::lattice_dist_sq_batch(coords, xs.subspan(lo, len), out.subspan(lo, len));
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// CoefficientVector

CoefficientVector CoefficientVector::from_unit(std::vector<double> coords) {
  if (coords.empty()) throw PreconditionViolated("coefficient vector is empty");
  CompensatedSum norm2;
  for (double c : coords) norm2.add(c * c);
  if (std::abs(norm2.value() - 1.0) > 1e-12) {
    throw PreconditionViolated("coefficient vector is not a unit vector");
  }
  return CoefficientVector(std::move(coords));
}

CoefficientVector CoefficientVector::normalized(std::vector<double> coords) {
  if (coords.empty()) throw PreconditionViolated("coefficient vector is empty");
  CompensatedSum norm2;
  for (double c : coords) norm2.add(c * c);
  const double norm = std::sqrt(norm2.value());
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw PreconditionViolated("cannot normalize a zero or non-finite vector");
  }
  for (double& c : coords) c /= norm;
  return CoefficientVector(std::move(coords));
}

CoefficientVector CoefficientVector::uniform(std::size_t n) {
  if (n == 0) throw PreconditionViolated("dimension must be positive");
  return CoefficientVector(std::vector<double>(n, 1.0 / std::sqrt(double(n))));
}

CoefficientVector CoefficientVector::basis(std::size_t n, std::size_t index) {
  if (index >= n) throw PreconditionViolated("basis index out of range");
  std::vector<double> coords(n, 0.0);
  coords[index] = 1.0;
  return CoefficientVector(std::move(coords));
}

double CoefficientVector::max_abs() const noexcept {
  double m = 0.0;
  for (double c : coords_) m = std::max(m, std::abs(c));
  return m;
}

std::string CoefficientVector::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double c : coords_) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &c, sizeof(double));
    for (unsigned char byte : bytes) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    }
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distances and power sums

double dist_to_lattice(std::span<const double> x) noexcept {
  return std::sqrt(simd::lattice_dist_sq(x, 1.0));
}

double dist_to_lattice(const CoefficientVector& theta, double xi) noexcept {
  return std::sqrt(simd::lattice_dist_sq(theta.coords(), xi));
}

CoefficientVector theta_zero(std::size_t n) {
  if (n == 0 || n % 4 != 0) {
    throw BadDimension("theta0 needs n divisible by 4, got " + std::to_string(n));
  }
  static constexpr double kPattern[4] = {1.0, kSqrt2, -1.0, -kSqrt2};
  const double scale = std::sqrt(1.5 * static_cast<double>(n));
  std::vector<double> coords(n);
  for (std::size_t j = 0; j < n; ++j) coords[j] = kPattern[j % 4] / scale;
  return CoefficientVector::normalized(std::move(coords));
}

PowerSumConditions check_conditions_i_ii(const CoefficientVector& theta) noexcept {
  CompensatedSum cubes;
  CompensatedSum quartics;
  for (double c : theta.coords()) {
    const double c2 = c * c;
    cubes.add(c2 * c);
    quartics.add(c2 * c2);
  }
  const double n = static_cast<double>(theta.size());
  return {n * std::abs(cubes.value()), n * quartics.value()};
}

double condition_iii_rhs(std::size_t n, double R, double xi) noexcept {
  const double a = std::abs(xi);
  if (a == 0.0) return 0.0;
  return 0.1 * std::min(a, (static_cast<double>(n) / R) / a);
}

std::string_view outcome_name(CertificateOutcome outcome) noexcept {
  switch (outcome) {
    case CertificateOutcome::kCertified:
      return "certified";
    case CertificateOutcome::kRefuted:
      return "refuted";
    case CertificateOutcome::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

nlohmann::json to_json(const ArithmeticCertificate& cert) {
  nlohmann::json j;
  j["outcome"] = outcome_name(cert.outcome);
  j["R"] = cert.R;
  j["grid_step"] = cert.grid_step;
  j["margin"] = cert.margin;
  if (cert.counterexample_xi) j["counterexample_xi"] = *cert.counterexample_xi;
  j["n"] = cert.n;
  j["theta_digest"] = cert.theta_digest;
  j["grid_points"] = cert.grid_points;
  return j;
}

// ---------------------------------------------------------------------------
// Condition (iii)

LatticeGrid::LatticeGrid(const CoefficientVector& theta, double grid_step)
    : n_(theta.size()),
      step_(grid_step),
      analytic_limit_(0.5 / theta.max_abs()),
      steps_per_unit_(integral_inverse(grid_step)),
      digest_(theta.digest()) {
  if (!(grid_step > 0.0 && grid_step <= 1e-2)) {
    throw PreconditionViolated("grid_step must lie in (0, 1e-2]");
  }
  const double hi = static_cast<double>(n_);
  if (analytic_limit_ >= hi) return;
  const std::size_t count = grid_count(analytic_limit_, hi, step_);
  first_index_ = static_cast<std::size_t>(std::ceil(analytic_limit_ / step_));
  std::vector<double> xs(count);
  for (std::size_t k = 0; k < count; ++k) xs[k] = xi(k);
  dist_.resize(count);
  evaluate_grid(theta.coords(), xs, dist_);
  for (double& d : dist_) d = std::sqrt(d);
}

double LatticeGrid::xi(std::size_t k) const noexcept {
  const double i = static_cast<double>(first_index_ + k);
  return steps_per_unit_ ? i / *steps_per_unit_ : i * step_;
}

ArithmeticCertificate LatticeGrid::certify(double R) const {
  ArithmeticCertificate cert;
  cert.R = R;
  cert.grid_step = step_;
  cert.n = n_;
  cert.theta_digest = digest_;
  cert.grid_points = dist_.size();

  const double required = 1.1 * step_;
  double min_gap = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best;  // argmin of the first violating run
  bool run_closed = false;
  for (std::size_t k = 0; k < dist_.size(); ++k) {
    const double x = xi(k);
    const double gap = dist_[k] - condition_iii_rhs(n_, R, x);
    min_gap = std::min(min_gap, gap);
    if (run_closed) continue;
    if (gap < 0.0) {
      if (!best || gap < dist_[*best] - condition_iii_rhs(n_, R, xi(*best))) {
        best = k;
      }
    } else if (best) {
      run_closed = true;
    }
  }
  if (dist_.empty()) {
    cert.margin = std::numeric_limits<double>::infinity();
    cert.outcome = CertificateOutcome::kCertified;
    return cert;
  }
  cert.margin = min_gap - required;
  if (best) {
    cert.outcome = CertificateOutcome::kRefuted;
    cert.counterexample_xi = xi(*best);
  } else if (cert.margin >= 0.0) {
    cert.outcome = CertificateOutcome::kCertified;
  } else {
    cert.outcome = CertificateOutcome::kInconclusive;
  }
  return cert;
}

ArithmeticCertificate certify_condition_iii(const CoefficientVector& theta,
                                            double R, double grid_step) {
  if (!(R >= 1.0)) throw PreconditionViolated("R must be >= 1");
  return LatticeGrid(theta, grid_step).certify(R);
}

CertifiedRange minimal_certified_r(const CoefficientVector& theta,
                                   double grid_step, double r_tol) {
  if (!(r_tol >= 1e-3)) throw PreconditionViolated("R_tol must be >= 1e-3");
  const auto [r_i, r_ii] = check_conditions_i_ii(theta);
  const double n = static_cast<double>(theta.size());
  const double floor_r = std::max({r_i, r_ii, 1.0});
  const double ceiling_r = n * n;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (floor_r > ceiling_r) return {kInf, 0.0};

  const LatticeGrid grid(theta, grid_step);
  auto outcome = [&](double R) { return grid.certify(R).outcome; };
  const double ratio = 1.0 + r_tol;

  CertifiedRange out{kInf, 0.0};
  if (outcome(floor_r) == CertificateOutcome::kCertified) {
    out.r_upper = floor_r;
  } else if (outcome(ceiling_r) == CertificateOutcome::kCertified) {
    double lo = floor_r;
    double hi = ceiling_r;
    while (hi / lo > ratio) {
      const double mid = std::sqrt(lo * hi);
      (outcome(mid) == CertificateOutcome::kCertified ? hi : lo) = mid;
    }
    out.r_upper = hi;
  }

  if (outcome(ceiling_r) == CertificateOutcome::kRefuted) {
    out.r_lower = ceiling_r;
  } else if (outcome(floor_r) == CertificateOutcome::kRefuted) {
    double lo = floor_r;
    double hi = std::isfinite(out.r_upper) ? out.r_upper : ceiling_r;
    while (hi / lo > ratio) {
      const double mid = std::sqrt(lo * hi);
      (outcome(mid) == CertificateOutcome::kRefuted ? lo : hi) = mid;
    }
    out.r_lower = lo;
  }
  return out;
}

// ---------------------------------------------------------------------------
// S function and its tail integral

double s_function(const CoefficientVector& theta, const DiscreteLaw& law_y,
                  double xi) {
  if (!law_y.is_symmetric()) {
    throw PreconditionViolated("s_function needs a symmetric law for Y");
  }
  CompensatedSum acc;
  for (const auto& a : law_y.atoms()) {
    if (a.value == 0.0) continue;
    acc.add(a.weight * simd::lattice_dist_sq(theta.coords(), xi * a.value / (2.0 * kPi)));
  }
  return std::sqrt(std::max(acc.value(), 0.0));
}

double tail_integral_check(const CoefficientVector& theta,
                           const DiscreteLaw& law_y, double T) {
  if (!(T >= 1.0)) throw PreconditionViolated("tail integral needs T >= 1");
  if (!law_y.is_symmetric()) {
    throw PreconditionViolated("tail integral needs a symmetric law for Y");
  }
  double y_max = 0.0;
  for (const auto& a : law_y.atoms()) y_max = std::max(y_max, std::abs(a.value));
  QuadratureOptions opts;
  opts.abs_tol = 1e-10;
  if (y_max > 0.0) {
    // d² kinks are spaced π/(|y| |θ_j|) apart in ξ.
    opts.max_panel_width = 0.5 * kPi / (y_max * theta.max_abs());
  }
  auto integrand = [&](double xi) {
    const double s = s_function(theta, law_y, xi);
    return std::exp(-4.0 * s * s) / xi;
  };
  return integrate(integrand, std::pow(T, 1.0 / 6.0), T, opts).value;
}

double sqrt2_diophantine_check(double xi_max, double grid_step) {
  if (!(xi_max >= 1.0)) throw PreconditionViolated("xi_max must be >= 1");
  if (!(grid_step > 0.0 && grid_step <= 1e-3)) {
    throw PreconditionViolated("grid_step must lie in (0, 1e-3]");
  }
  const auto per_unit = integral_inverse(grid_step);
  const std::size_t first = static_cast<std::size_t>(std::ceil(0.5 / grid_step));
  const std::size_t count = grid_count(0.5, xi_max, grid_step);
  const double coords[2] = {1.0, kSqrt2};
  const std::size_t blocks = (count + kGridBlock - 1) / kGridBlock;
  std::vector<double> block_min(blocks, std::numeric_limits<double>::infinity());
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kGridBlock;
    const std::size_t len = std::min(kGridBlock, count - lo);
    std::vector<double> xs(len);
    std::vector<double> dsq(len);
    for (std::size_t k = 0; k < len; ++k) {
      const double i = static_cast<double>(first + lo + k);
      xs[k] = per_unit ? i / *per_unit : i * grid_step;
    }
    simd::lattice_dist_sq_batch(coords, xs, dsq);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) m = std::min(m, xs[k] * xs[k] * dsq[k]);
    block_min[b] = m;
  });
  return *std::min_element(block_min.begin(), block_min.end());
}

}  // namespace belab
