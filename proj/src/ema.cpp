#include "specphase/ema.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "specphase/error.hpp"
#include "specphase/format.hpp"

namespace specphase::ema {
namespace {

// Near the largest-degree pole the phase conditions are very steep in â;
// extended precision keeps the residuals at the 1e-12 level there.
using real = long double;

constexpr int kScanPoints = 256;
constexpr real kTieTolerance = 1e-12L;

// Resolvent sums parameterized by the gap u = φ - c_max â, so the
// denominators u + (c_max - c_t) â carry no cancellation.
struct Resolvent {
  const DegreeDistribution* dist;
  real a_hat;
  real gap;

  real denom(int degree) const {
    return gap + static_cast<real>(dist->max_degree() - degree) * a_hat;
  }
  real r(int n) const {
    real s = 0;
    for (const auto& e : dist->entries()) s += e.weight * std::pow(static_cast<real>(e.degree), n) / denom(e.degree);
    return s;
  }
  real s(int n) const {
    real acc = 0;
    for (const auto& e : dist->entries()) {
      const real d = denom(e.degree);
      acc += e.weight * std::pow(static_cast<real>(e.degree), n) / (d * d);
    }
    return acc;
  }
  real phi() const { return gap + dist->max_degree() * a_hat; }
};

real r1_target(real mean, real a) { return mean * a / (1 - a * a); }

// Solves R1(u) = c̄ â / (1 - â²) for the gap u. R1 is convex and decreasing
// in u, so Newton steps started left of the root increase monotonically.
Resolvent solve_gap(const DegreeDistribution& dist, real a) {
  const real mean = dist.mean_degree();
  const real target = r1_target(mean, a);
  const auto& top = dist.entries().back();
  real lo = top.weight * top.degree / target;  // R1(lo) >= target
  real hi = (1 - a * a) / a;                   // R1(hi) <= target
  Resolvent res{&dist, a, lo};
  if (!(lo < hi)) {
    res.gap = hi;
    return res;
  }
  real u = lo;
  for (int it = 0; it < 400; ++it) {
    res.gap = u;
    const real f = res.r(1) - target;
    if (f <= 0) break;
    real slope = 0;
    for (const auto& e : dist.entries()) {
      const real d = res.denom(e.degree);
      slope -= e.weight * e.degree / (d * d);
    }
    real next = u - f / slope;
    if (!(next > u)) break;
    if (next >= hi) next = (u + hi) / 2;
    u = next;
  }
  res.gap = u;
  return res;
}

using Residual = std::function<real(const Resolvent&)>;

// Bracketed root with secant steps when they land well inside the bracket
// and bisection otherwise. f(lo) < 0 <= f(hi); stops once |f(hi)| <= rtol
// or the bracket reaches working precision.
real bracketed_root(const std::function<real(real)>& f, real lo, real hi, real f_lo, real f_hi, real rtol) {
  bool last_was_secant_good = false;
  for (int it = 0; it < 400; ++it) {
    const real width = hi - lo;
    if (width <= 4 * std::numeric_limits<real>::epsilon() * std::abs(hi) || std::abs(f_hi) <= rtol) break;
    real x = (lo + hi) / 2;
    if (last_was_secant_good && std::isfinite(f_lo) && std::isfinite(f_hi)) {
      const real s = lo - f_lo * (hi - lo) / (f_hi - f_lo);
      if (s > lo + width / 64 && s < hi - width / 64) x = s;
    }
    const real fx = f(x);
    const real old_width = width;
    if (fx < 0) {
      lo = x;
      f_lo = fx;
    } else {
      hi = x;
      f_hi = fx;
    }
    last_was_secant_good = (hi - lo) < old_width / 2 || !last_was_secant_good;
    if (x == lo && x == hi) break;
  }
  return hi;
}

// First sign change from negative to nonnegative of residual(â) on
// (0, right], located on a uniform grid and refined.
std::optional<real> first_root(const DegreeDistribution& dist, const Residual& residual, real right, real rtol) {
  auto f = [&](real a) { return residual(solve_gap(dist, a)); };
  real prev_a = right / kScanPoints;
  real prev_f = f(prev_a);
  if (prev_f >= 0) return prev_a;
  for (int k = 2; k <= kScanPoints; ++k) {
    const real a = right * k / kScanPoints;
    const real fa = f(a);
    if (fa >= 0) return bracketed_root(f, prev_a, a, prev_f, fa, rtol);
    prev_a = a;
    prev_f = fa;
  }
  return std::nullopt;
}

real undetectable_residual(const Resolvent& r) {
  const real a = r.a_hat;
  const real rhs = r.dist->mean_degree() * (1 + a * a) / ((1 - a * a) * (1 - a * a));
  return (r.s(2) - rhs) / rhs;
}

real detectable_residual(const Resolvent& r, real structure) {
  const real a = r.a_hat;
  const real rhs = r.dist->mean_degree() * (a + 1 / structure) / (1 - a * a);
  return (r.r(2) - rhs) / rhs;
}

real unpartitioned_residual(const Resolvent& r, real theta) {
  const real rhs = r.dist->mean_degree() / (1 - theta - r.a_hat);
  return (r.r(2) - rhs) / rhs;
}

SaddlePoint finish(const DegreeDistribution& dist, real a, const Residual& residual) {
  const Resolvent r = solve_gap(dist, a);
  const real target = r1_target(dist.mean_degree(), a);
  SaddlePoint out;
  out.a_hat = static_cast<double>(a);
  out.phi = static_cast<double>(r.phi());
  out.residual_r1 = static_cast<double>(std::abs(r.r(1) - target) / target);
  out.residual_phase = static_cast<double>(std::abs(residual(r)));
  return out;
}

real relative_tol(double tol) { return std::max<real>(static_cast<real>(tol), 8 * std::numeric_limits<real>::epsilon()); }

}  // namespace

char phase_code(Phase p) {
  switch (p) {
    case Phase::detectable: return 'D';
    case Phase::undetectable: return 'U';
    case Phase::unpartitioned: return 'N';
  }
  return '?';
}

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::detectable: return "detectable";
    case Phase::undetectable: return "undetectable";
    case Phase::unpartitioned: return "unpartitioned";
  }
  return "unknown";
}

double r_n(const DegreeDistribution& dist, double phi, double a_hat, int n) {
  double s = 0.0;
  for (const auto& e : dist.entries()) {
    const double d = phi - e.degree * a_hat;
    if (!(d > 0.0)) {
      throw DomainError("R_n: φ - c_t â <= 0 at degree " + std::to_string(e.degree));
    }
    s += e.weight * std::pow(static_cast<double>(e.degree), n) / d;
  }
  return s;
}

double s_n(const DegreeDistribution& dist, double phi, double a_hat, int n) {
  double s = 0.0;
  for (const auto& e : dist.entries()) {
    const double d = phi - e.degree * a_hat;
    if (!(d > 0.0)) {
      throw DomainError("S_n: φ - c_t â <= 0 at degree " + std::to_string(e.degree));
    }
    s += e.weight * std::pow(static_cast<double>(e.degree), n) / (d * d);
  }
  return s;
}

double phi_for_a_hat(const DegreeDistribution& dist, double a_hat) {
  if (!(a_hat > 0.0 && a_hat < 1.0)) throw DomainError("â must lie in (0, 1)");
  return static_cast<double>(solve_gap(dist, a_hat).phi());
}

SaddlePoint solve_undetectable(const DegreeDistribution& dist, double tol) {
  const Residual residual = undetectable_residual;
  const auto a = first_root(dist, residual, 1 - 1e-6L, relative_tol(tol));
  if (!a) throw ConvergenceError("undetectable phase: no root of the S2 condition in (0, 1)", 0.0);
  return finish(dist, *a, residual);
}

std::optional<SaddlePoint> solve_detectable(const DegreeDistribution& dist, double structure, double tol) {
  if (!(structure > 0.0 && structure <= 1.0)) return std::nullopt;
  const SaddlePoint und = solve_undetectable(dist, tol);
  const Residual residual = [structure](const Resolvent& r) { return detectable_residual(r, structure); };
  // g_D(â_U) has the sign of 1/Γ* - 1/Γ: a root below â_U exists iff Γ >= Γ*.
  // At Γ = Γ* the root is â_U itself; accept a rounding-level miss there.
  const real at_edge = residual(solve_gap(dist, und.a_hat));
  if (at_edge < -relative_tol(tol)) return std::nullopt;
  if (at_edge < 0) return finish(dist, und.a_hat, residual);
  const auto a = first_root(dist, residual, und.a_hat, relative_tol(tol));
  if (!a) return std::nullopt;
  return finish(dist, *a, residual);
}

std::optional<SaddlePoint> solve_unpartitioned(const DegreeDistribution& dist, double theta, double tol) {
  if (!(theta >= 0.0)) throw DomainError("θ must be nonnegative");
  if (theta >= 1.0) return std::nullopt;  // R2 > 0 needs 1 - θ - â > 0 with â > 0
  const SaddlePoint und = solve_undetectable(dist, tol);
  const real cap = 1 - static_cast<real>(theta);
  const real right = std::min<real>(und.a_hat, cap * (1 - 1e-9L));
  const Residual residual = [theta](const Resolvent& r) { return unpartitioned_residual(r, theta); };
  const auto a = first_root(dist, residual, right, relative_tol(tol));
  if (!a) return std::nullopt;
  return finish(dist, *a, residual);
}

namespace {

double threshold_from(const DegreeDistribution& dist, const SaddlePoint& und) {
  const Resolvent r = solve_gap(dist, und.a_hat);
  const real a = und.a_hat;
  const real inv = r.r(2) * (1 - a * a) / dist.mean_degree() - a;
  return static_cast<double>(1 / inv);
}

}  // namespace

double detectability_threshold(const DegreeDistribution& dist, double tol) {
  return threshold_from(dist, solve_undetectable(dist, tol));
}

EmaSolution classify_phase(const PhaseQuery& query, double tol) {
  if (query.dist == nullptr) throw ParameterError("classify_phase: missing distribution");
  const DegreeDistribution& dist = *query.dist;
  if (!(query.structure >= 0.0 && query.structure <= 1.0)) throw DomainError("Γ must lie in [0, 1]");
  if (!(query.theta > 0.0)) throw DomainError("θ must be positive");

  const SaddlePoint und = solve_undetectable(dist, tol);
  EmaSolution out;
  out.gamma_star = threshold_from(dist, und);

  SaddlePoint chosen = und;
  out.phase = Phase::undetectable;
  if (query.structure >= out.gamma_star) {
    if (auto det = solve_detectable(dist, query.structure, tol)) {
      chosen = *det;
      out.phase = Phase::detectable;
    }
  }
  if (auto unp = solve_unpartitioned(dist, query.theta, tol)) {
    const double scale = std::max(1.0, std::abs(chosen.phi));
    const double diff = unp->phi - chosen.phi;
    if (std::abs(diff) <= static_cast<double>(kTieTolerance) * scale) {
      out.competing_phi = unp->phi;
    } else if (diff > 0) {
      chosen = *unp;
      out.phase = Phase::unpartitioned;
    }
  }

  out.phi = chosen.phi;
  out.a_hat = chosen.a_hat;
  out.lambda1 = chosen.phi;
  out.omega_hat_zero = out.phase != Phase::unpartitioned;
  if (out.phase == Phase::undetectable) {
    out.m_hat_sq = 0.0;
  } else if (out.phase == Phase::detectable && dist.is_regular() && dist.min_degree() >= 3) {
    out.m_hat_sq = regular_closed_forms(dist.min_degree(), query.structure, query.theta, query.p1).m_hat_sq;
  }
  return out;
}

std::optional<double> regular_unpartitioned_boundary(int c, double theta) {
  const double a = c * (1.0 - theta);
  double disc = a * a - 4.0 * (c - 1);
  if (a <= 0.0) return std::nullopt;
  // The root is double at θ_max, where the square root turns rounding noise
  // in disc (and in θ itself) into an O(sqrt(eps)) error. Values inside that
  // noise floor are treated as the double root.
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * a * a;
  if (std::abs(disc) <= noise) disc = 0.0;
  if (disc < 0.0) return std::nullopt;
  return (a + std::sqrt(disc)) / (2.0 * (c - 1));
}

RegularClosedForms regular_closed_forms(int c, double structure, double theta, double p1) {
  if (c < 3) throw DomainError("regular closed forms need c >= 3");
  if (!(structure > 0.0 && structure <= 1.0)) throw DomainError("Γ must lie in (0, 1] (pole at Γ = 0)");
  if (!(p1 > 0.0 && p1 < 1.0)) throw DomainError("p1 must lie in (0, 1)");
  const double cm1 = c - 1.0;
  const double g = structure;
  RegularClosedForms out{};
  out.lambda_detectable = cm1 * g + 1.0 / g;
  out.m_hat_sq = (1.0 - p1) / (c * p1) * (1.0 - 1.0 / (cm1 * cm1 * g * g)) * (cm1 * g * g - 1.0);
  out.lambda_undetectable = 2.0 * std::sqrt(cm1);
  out.gamma_star = 1.0 / std::sqrt(cm1);
  out.gamma_unpartitioned = regular_unpartitioned_boundary(c, theta);
  out.theta_max = 1.0 - 2.0 * std::sqrt(cm1) / c;
  out.ones_eigenvalue = c * (1.0 - theta);
  return out;
}

DegreeDistribution poisson_truncated(double mean_degree, double epsilon) {
  if (!(mean_degree > 0.0)) throw ParameterError("Poisson mean must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("truncation epsilon must lie in (0, 1)");

  // Mass function far enough into the tail that the remainder is negligible
  // against any epsilon above the smallest double.
  std::vector<double> pmf;
  double log_p = -mean_degree;
  const double log_mean = std::log(mean_degree);
  for (int t = 0;; ++t) {
    if (t > 0) log_p += log_mean - std::log(static_cast<double>(t));
    pmf.push_back(std::exp(log_p));
    if (t > mean_degree && log_p < -745.0) break;
  }
  std::vector<double> tail(pmf.size() + 1, 0.0);  // tail[t] = P(X >= t)
  for (std::size_t t = pmf.size(); t-- > 0;) tail[t] = tail[t + 1] + pmf[t];

  int t_max = 1;
  while (static_cast<std::size_t>(t_max + 1) < tail.size() && tail[t_max + 1] >= epsilon) ++t_max;

  double kept = 0.0;
  for (int t = 1; t <= t_max; ++t) kept += pmf[t];
  std::vector<DegreeDistribution::Entry> entries;
  for (int t = 1; t <= t_max; ++t) {
    if (pmf[t] > 0.0) entries.push_back({t, pmf[t] / kept});
  }
  // Renormalize once more so the weights sum to one in floating point.
  double total = 0.0;
  for (const auto& e : entries) total += e.weight;
  for (auto& e : entries) e.weight /= total;

  DegreeDistribution dist(std::move(entries));
  dist.tail_cutoff = t_max;
  dist.dropped_mass = pmf[0] + tail[t_max + 1];
  return dist;
}

double predicted_overlap_regular(int c, double structure, double p1) {
  const auto forms = regular_closed_forms(c, structure, 1.0, p1);
  if (structure <= forms.gamma_star) return 0.5;
  const double p2 = 1.0 - p1;
  const double a = 1.0 / ((c - 1.0) * structure);
  const double mu1_sq = c * c * forms.m_hat_sq * a * a / ((1.0 - a * a) * (1.0 - a * a));
  const double mu2_sq = (p1 / p2) * (p1 / p2) * mu1_sq;
  const double var = 1.0 - p1 * mu1_sq - p2 * mu2_sq;
  if (var <= 1e-15) return 1.0;
  const double sigma = std::sqrt(var);
  auto normal_cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  return p1 * normal_cdf(std::sqrt(mu1_sq) / sigma) + p2 * normal_cdf(std::sqrt(mu2_sq) / sigma);
}

double dense_threshold_cin_minus_cout(double mean_degree) {
  if (!(mean_degree > 0.0)) throw ParameterError("mean degree must be positive");
  return 2.0 * std::sqrt(mean_degree);
}

}  // namespace specphase::ema
