#include "rwtrace/phase_criterion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "rwtrace/errors.hpp"

namespace rwtrace {

namespace {

constexpr int kMaxBracketDoublings = 200;
constexpr int kMaxBisections = 400;

double projection(Direction dir, std::span<const double> ell) { return dir.sign * ell[dir.axis]; }

void require_direction(const BiasDistribution& p0, std::span<const double> ell) {
  if (ell.size() != static_cast<std::size_t>(p0.dimension())) {
    throw Error(ErrorCode::kDomainError, "direction has wrong dimension");
  }
}

// log sum_e p0(e) exp(x.e) and the tilted mean / covariance at x.
struct Tilt {
  double log_mgf = 0.0;
  RealVector mean;
  std::vector<RealVector> cov;
};

Tilt tilt(const BiasDistribution& p0, std::span<const double> x) {
  const int d = p0.dimension();
  const int n = 2 * d;
  std::array<double, 2 * kMaxDimension> logw{};
  double top = -INFINITY;
  for (int k = 0; k < n; ++k) {
    const Direction dir = Direction::from_index(k);
    logw[k] = p0.weight(k) > 0.0 ? std::log(p0.weight(k)) + dir.sign * x[dir.axis] : -INFINITY;
    top = std::max(top, logw[k]);
  }
  std::array<double, 2 * kMaxDimension> w{};
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    w[k] = std::exp(logw[k] - top);
    total += w[k];
  }
  Tilt out;
  out.log_mgf = top + std::log(total);
  out.mean.assign(d, 0.0);
  out.cov.assign(d, RealVector(d, 0.0));
  for (int k = 0; k < n; ++k) {
    const Direction dir = Direction::from_index(k);
    out.mean[dir.axis] += dir.sign * w[k] / total;
  }
  // Steps are unit vectors: E[e_a e_b] is diagonal with entries P(axis a).
  for (int k = 0; k < n; ++k) {
    const Direction dir = Direction::from_index(k);
    out.cov[dir.axis][dir.axis] += w[k] / total;
  }
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) out.cov[a][b] -= out.mean[a] * out.mean[b];
  }
  return out;
}

// Solves A y = b for symmetric positive definite A; false if A is not.
bool cholesky_solve(std::vector<RealVector> a, RealVector b, RealVector& y) {
  const std::size_t n = b.size();
  for (std::size_t j = 0; j < n; ++j) {
    double s = a[j][j];
    for (std::size_t k = 0; k < j; ++k) s -= a[j][k] * a[j][k];
    if (!(s > 1e-300)) return false;
    a[j][j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      double t = a[i][j];
      for (std::size_t k = 0; k < j; ++k) t -= a[i][k] * a[j][k];
      a[i][j] = t / a[j][j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
    b[i] /= a[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k][i] * b[k];
    b[i] /= a[i][i];
  }
  y = std::move(b);
  return true;
}

}  // namespace

double phi(const BiasDistribution& p0, std::span<const double> ell, double t) {
  require_direction(p0, ell);
  // 1 + sum p(e) expm1(.) is exactly 1 at t = 0 even when the weights sum to 1 - ulp.
  double s = 0.0;
  for (int k = 0; k < 2 * p0.dimension(); ++k) {
    s += p0.weight(k) * std::expm1(-t * projection(Direction::from_index(k), ell));
  }
  return 1.0 + s;
}

double phi_derivative(const BiasDistribution& p0, std::span<const double> ell, double t) {
  require_direction(p0, ell);
  double s = 0.0;
  for (int k = 0; k < 2 * p0.dimension(); ++k) {
    const double proj = projection(Direction::from_index(k), ell);
    s -= p0.weight(k) * proj * std::exp(-t * proj);
  }
  return s;
}

double solve_root(const BiasDistribution& p0, std::span<const double> ell, double tol) {
  require_direction(p0, ell);
  const double slope = dot(drift(p0), ell);
  if (!(slope > 0.0)) {
    throw Error(ErrorCode::kNoPositiveRoot, "delta0 . l = " + std::to_string(slope) + " <= 0");
  }
  double hi = 1.0;
  int doublings = 0;
  while (phi(p0, ell, hi) <= 1.0) {
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings || !std::isfinite(hi)) {
      throw Error(ErrorCode::kNoPositiveRoot, "phi stays below 1; no step has negative projection");
    }
  }
  // phi < 1 on (0, t*) and > 1 beyond, by strict convexity and phi'(0) < 0.
  double lo = 0.0;
  int iterations = 0;
  while (hi - lo > tol) {
    if (++iterations > kMaxBisections) {
      throw Error(ErrorCode::kNonConvergence, "bisection did not reach tolerance");
    }
    const double mid = 0.5 * (lo + hi);
    if (phi(p0, ell, mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double example13_root(int d, int k0, int ki, double gamma0, double gammai) {
  if (d < 1 || k0 < 1 || ki < 1 || k0 > d || ki > d || !(gamma0 > 1.0) || !(gammai > 1.0)) {
    throw Error(ErrorCode::kDomainError, "example13_root needs 1 <= k0, ki <= d and gamma0, gammai > 1");
  }
  const double kmin = std::min(k0, ki);
  return std::sqrt(static_cast<double>(ki)) * std::log1p(kmin * (gamma0 - 1.0) / ki);
}

RealVector trap_drift(const BiasDistribution& p0, std::span<const double> ell, double t) {
  require_direction(p0, ell);
  RealVector out(static_cast<std::size_t>(p0.dimension()), 0.0);
  for (int k = 0; k < 2 * p0.dimension(); ++k) {
    const Direction dir = Direction::from_index(k);
    out[dir.axis] += dir.sign * p0.weight(k) * std::exp(-t * projection(dir, ell));
  }
  return out;
}

RateFunctionResult rate_function(const BiasDistribution& p0, std::span<const double> target) {
  const int d = p0.dimension();
  if (target.size() != static_cast<std::size_t>(d)) throw Error(ErrorCode::kDomainError, "target has wrong dimension");
  double l1 = 0.0;
  for (double v : target) l1 += std::abs(v);
  if (!p0.all_positive() || !(l1 < 1.0)) {
    throw Error(ErrorCode::kTargetOutsideHull, "target must satisfy |target|_1 < 1 with all step weights positive");
  }

  constexpr double kGradTol = 1e-10;
  constexpr int kMaxIterations = 500;
  RateFunctionResult res;
  RealVector x(static_cast<std::size_t>(d), 0.0);
  auto objective = [&](const RealVector& at) { return dot(at, target) - tilt(p0, at).log_mgf; };
  double f = objective(x);
  for (int it = 0; it < kMaxIterations; ++it) {
    const Tilt tl = tilt(p0, x);
    RealVector grad(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) grad[j] = target[j] - tl.mean[j];
    res.gradient_norm = euclidean_norm(grad);
    res.iterations = it;
    if (res.gradient_norm <= kGradTol) {
      res.value = f;
      res.maximiser = x;
      return res;
    }
    RealVector dir;
    if (!cholesky_solve(tl.cov, grad, dir)) dir = grad;
    // Backtracking line search on the concave objective.
    double step = 1.0;
    RealVector trial(x.size());
    double ft = f;
    for (int ls = 0; ls < 60; ++ls) {
      for (int j = 0; j < d; ++j) trial[j] = x[j] + step * dir[j];
      ft = objective(trial);
      if (ft >= f) break;
      step *= 0.5;
    }
    if (ft < f) break;
    x = trial;
    f = ft;
  }
  // Line search stalls only at machine precision; accept if the gradient is
  // still tiny relative to the objective scale.
  const Tilt tl = tilt(p0, x);
  RealVector grad(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) grad[j] = target[j] - tl.mean[j];
  res.gradient_norm = euclidean_norm(grad);
  if (res.gradient_norm <= 1e-8) {
    res.value = f;
    res.maximiser = x;
    return res;
  }
  throw Error(ErrorCode::kNonConvergence, "rate function ascent stalled at gradient norm " + std::to_string(res.gradient_norm));
}

double backtrack_bound(const BiasDistribution& p0, std::span<const double> ell, double h) {
  if (!(h >= 0.0)) throw Error(ErrorCode::kDomainError, "backtrack depth must be >= 0");
  const double t = solve_root(p0, ell);
  return std::exp(-t * h);
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kBallistic: return "Ballistic";
    case Phase::kSubBallistic: return "SubBallistic";
    case Phase::kCritical: return "Critical";
    case Phase::kUndefined: return "Undefined";
  }
  return "Undefined";
}

namespace {

void put_vector(std::ostringstream& os, const char* key, const RealVector& v) {
  os << key << '=';
  for (std::size_t j = 0; j < v.size(); ++j) os << (j ? " " : "") << v[j];
  os << '\n';
}

}  // namespace

std::string PhaseReport::to_key_values() const {
  std::ostringstream os;
  os.precision(17);
  put_vector(os, "delta0", drift0);
  put_vector(os, "delta", drift);
  put_vector(os, "log_odds", log_odds);
  put_vector(os, "ell", direction);
  os << "beta=" << beta << '\n';
  os << "t=" << t << '\n';
  os << "alpha=" << alpha << '\n';
  os << "phase=" << to_string(phase) << '\n';
  os << "critical_tolerance=" << critical_tolerance << '\n';
  os << "condition1.a=" << condition1.part_a << '\n';
  os << "condition1.b=" << condition1.part_b << '\n';
  os << "condition1.c=" << condition1.part_c << '\n';
  os << "condition1.delta0_dot_ell=" << condition1.drift_dot_direction << '\n';
  os << "transience=" << to_string(condition1.verdict) << '\n';
  put_vector(os, "trap_drift", trap_drift);
  os << "trap_drift_dot_ell=" << trap_drift_dot_direction << '\n';
  os << "lambda=" << lambda_value << '\n';
  os << "lambda_numeric=" << lambda_numeric << '\n';
  os << "diagnostic=" << diagnostic << '\n';
  return os.str();
}

PhaseReport classify(const BiasDistribution& p0, const BiasDistribution& pi, double tol) {
  PhaseReport r;
  r.critical_tolerance = tol;
  r.drift0 = drift(p0);
  r.drift = drift(pi);
  r.condition1 = check_condition1(p0, pi);
  if (pi.all_positive()) {
    const LogOddsDirection lo = log_odds(pi);
    r.log_odds = lo.raw;
    r.beta = lo.beta;
    if (lo.unit) r.direction = *lo.unit;
  }
  if (r.condition1.verdict != TransienceVerdict::kTransient) {
    std::ostringstream os;
    if (!r.condition1.part_a) os << "condition 1(a) fails: p0 must drift with delta0_1 > 0 and delta0_j >= 0; ";
    if (!r.condition1.part_b) os << "condition 1(b) fails: every weight must be positive; ";
    if (!r.condition1.direction_defined) os << "log-odds direction undefined (beta = 1); ";
    if (r.condition1.direction_defined && !r.condition1.part_c) os << "condition 1(c) fails: delta0 . l <= 0, walk is recurrent; ";
    r.diagnostic = os.str();
    r.phase = Phase::kUndefined;
    r.t = NAN;
    r.alpha = NAN;
    return r;
  }
  r.t = solve_root(p0, r.direction);
  r.alpha = std::exp(r.t);
  if (std::abs(r.beta - r.alpha) <= tol * r.alpha) {
    r.phase = Phase::kCritical;
  } else {
    r.phase = r.beta < r.alpha ? Phase::kBallistic : Phase::kSubBallistic;
  }
  r.trap_drift = trap_drift(p0, r.direction, r.t);
  r.trap_drift_dot_direction = dot(r.trap_drift, r.direction);
  r.lambda_value = -r.t * r.trap_drift_dot_direction;
  r.lambda_numeric = rate_function(p0, r.trap_drift).value;
  return r;
}

double simplicity_summand(const BiasDistribution& pi, const BiasDistribution& p0, Direction e, double c) {
  if (e == Direction{0, +1}) throw Error(ErrorCode::kDomainError, "e must differ from e_1");
  if (!(c > 0.0)) throw Error(ErrorCode::kDomainError, "c must be positive");
  const Condition1Report cond = check_condition1(p0, pi);
  if (cond.verdict != TransienceVerdict::kTransient) {
    throw Error(ErrorCode::kDomainError, "condition 1 does not hold for this pair");
  }
  const ConductanceParams params(pi);
  const int d = pi.dimension();
  const LatticePoint origin(d);
  const double log_ratio = params.log_conductance(origin, unit_vector(d, Direction{0, +1})) -
                           params.log_conductance(origin, unit_vector(d, e));
  const double log_beta = std::log(params.beta());
  // (beta^{c delta0.l} - 1) beta^c, evaluated in log space; min with 1.
  const double a = c * cond.drift_dot_direction * log_beta;
  const double log_factor = std::log(std::expm1(a)) + c * log_beta;
  const double factor = log_factor >= 0.0 ? 1.0 : std::exp(log_factor);
  return std::exp(log_ratio) * factor;
}

std::string to_string(SeriesTrend trend) {
  switch (trend) {
    case SeriesTrend::kSummable: return "summable";
    case SeriesTrend::kDivergent: return "divergent";
    case SeriesTrend::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SeriesReport simplicity_series(std::span<const BiasDistribution> pseq, const BiasDistribution& p0, Direction e, double c,
                               std::size_t n_terms) {
  if (pseq.size() < n_terms) throw Error(ErrorCode::kDomainError, "sequence shorter than n_terms");
  SeriesReport rep;
  double sum = 0.0;
  for (std::size_t i = 0; i < n_terms; ++i) {
    const double term = simplicity_summand(pseq[i], p0, e, c);
    rep.terms.push_back(term);
    sum += term;
    rep.partial_sums.push_back(sum);
  }
  if (n_terms == 0) {
    rep.trend = SeriesTrend::kSummable;
    return rep;
  }
  if (n_terms < 4) return rep;
  const std::size_t start = n_terms / 2;
  double log_ratio_sum = 0.0;
  std::size_t count = 0;
  bool tail_zero = true;
  for (std::size_t i = start; i + 1 < n_terms; ++i) {
    if (rep.terms[i + 1] > 0.0) tail_zero = false;
    if (rep.terms[i] > 0.0 && rep.terms[i + 1] > 0.0) {
      log_ratio_sum += std::log(rep.terms[i + 1] / rep.terms[i]);
      ++count;
    }
  }
  if (tail_zero) {
    rep.tail_ratio = 0.0;
    rep.trend = SeriesTrend::kSummable;
    return rep;
  }
  rep.tail_ratio = count ? std::exp(log_ratio_sum / static_cast<double>(count)) : 1.0;
  if (rep.tail_ratio <= 0.9) {
    rep.trend = SeriesTrend::kSummable;
  } else if (rep.tail_ratio >= 1.0 - 1e-12) {
    rep.trend = SeriesTrend::kDivergent;
  }
  return rep;
}

}  // namespace rwtrace
