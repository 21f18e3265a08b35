#include "rwtrace/bias_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "rwtrace/errors.hpp"

namespace rwtrace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double euclidean_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

BiasDistribution::BiasDistribution(int dimension, std::vector<double> weights)
    : dim_(dimension), weights_(std::move(weights)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw Error(ErrorCode::kInvalidDistribution, "dimension out of range: " + std::to_string(dimension));
  }
  if (weights_.size() != static_cast<std::size_t>(2 * dimension)) {
    throw Error(ErrorCode::kInvalidDistribution, "expected " + std::to_string(2 * dimension) + " weights, got " +
                                                     std::to_string(weights_.size()));
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::kInvalidDistribution, "negative or non-finite weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << sum;
    throw Error(ErrorCode::kInvalidDistribution, os.str());
  }
}

BiasDistribution BiasDistribution::from_rationals(int dimension, std::span<const Rational> weights) {
  // Exact sum with reduced fractions; overflow is not a concern for fixture-sized denominators.
  std::int64_t num = 0;
  std::int64_t den = 1;
  std::vector<double> w;
  for (const Rational& r : weights) {
    if (r.den <= 0 || r.num < 0) throw Error(ErrorCode::kInvalidDistribution, "rational weight must be num/den with den > 0, num >= 0");
    const std::int64_t g = std::gcd(den, r.den);
    num = num * (r.den / g) + r.num * (den / g);
    den = den / g * r.den;
    const std::int64_t h = std::gcd(num, den);
    if (h > 1) {
      num /= h;
      den /= h;
    }
    w.push_back(static_cast<double>(r.num) / static_cast<double>(r.den));
  }
  if (num != den) {
    throw Error(ErrorCode::kInvalidDistribution, "rational weights sum to " + std::to_string(num) + "/" + std::to_string(den));
  }
  // The float sum of exact-rational weights may be off by a few ulps.
  return BiasDistribution(dimension, std::move(w));
}

BiasDistribution BiasDistribution::symmetric(int dimension) {
  return BiasDistribution(dimension, std::vector<double>(static_cast<std::size_t>(2 * dimension), 1.0 / (2.0 * dimension)));
}

bool BiasDistribution::all_positive() const {
  for (double w : weights_) {
    if (!(w > 0.0)) return false;
  }
  return true;
}

std::string BiasDistribution::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (k) os << ' ';
    os << weights_[k];
  }
  return os.str();
}

RealVector drift(const BiasDistribution& p) {
  RealVector d(static_cast<std::size_t>(p.dimension()));
  for (int j = 0; j < p.dimension(); ++j) d[j] = p.weight(Direction{j, +1}) - p.weight(Direction{j, -1});
  return d;
}

LogOddsDirection log_odds(const BiasDistribution& p) {
  if (!p.all_positive()) throw Error(ErrorCode::kZeroWeight, "log-odds need strictly positive weights: " + p.to_string());
  LogOddsDirection out;
  out.raw.resize(static_cast<std::size_t>(p.dimension()));
  for (int j = 0; j < p.dimension(); ++j) {
    out.raw[j] = std::log(p.weight(Direction{j, +1})) - std::log(p.weight(Direction{j, -1}));
  }
  const double norm = euclidean_norm(out.raw);
  out.beta = std::exp(norm);
  if (norm > 0.0) {
    RealVector unit(out.raw);
    for (double& u : unit) u /= norm;
    out.unit = std::move(unit);
  }
  return out;
}

ConductanceParams::ConductanceParams(const BiasDistribution& p) : log_odds_(log_odds(p)) {
  for (int j = 0; j < p.dimension(); ++j) {
    c_.push_back(p.weight(Direction{j, -1}));
    log_c_.push_back(std::log(c_.back()));
  }
}

double ConductanceParams::log_conductance(const LatticePoint& x, const LatticePoint& y) const {
  Direction dir;
  if (x.dimension() != dimension() || !adjacent_direction(x, y, &dir)) {
    throw Error(ErrorCode::kNotAdjacent, x.to_string() + " and " + y.to_string());
  }
  return log_c_[dir.axis] + dot(join(x, y), log_odds_.raw);
}

double ConductanceParams::conductance(const LatticePoint& x, const LatticePoint& y) const {
  return std::exp(log_conductance(x, y));
}

double conductance(const ConductanceParams& params, const LatticePoint& x, const LatticePoint& y) {
  return params.conductance(x, y);
}

RealVector restricted_kernel(const BiasDistribution& p, const TraceGraph& g, const LatticePoint& x) {
  const VertexId id = g.find(x);
  if (id == kNoVertex) throw Error(ErrorCode::kVertexAbsent, x.to_string());
  const std::uint32_t mask = g.adjacency(id);
  if (mask == 0) throw Error(ErrorCode::kIsolatedVertex, x.to_string());
  RealVector k(static_cast<std::size_t>(2 * p.dimension()), 0.0);
  double total = 0.0;
  for (int e = 0; e < 2 * p.dimension(); ++e) {
    if ((mask >> e) & 1u) total += p.weight(e);
  }
  for (int e = 0; e < 2 * p.dimension(); ++e) {
    if ((mask >> e) & 1u) k[e] = p.weight(e) / total;
  }
  return k;
}

RealVector conductance_kernel(const ConductanceParams& params, const TraceGraph& g, const LatticePoint& x) {
  const VertexId id = g.find(x);
  if (id == kNoVertex) throw Error(ErrorCode::kVertexAbsent, x.to_string());
  const std::uint32_t mask = g.adjacency(id);
  if (mask == 0) throw Error(ErrorCode::kIsolatedVertex, x.to_string());
  const int n = 2 * params.dimension();
  // Normalise in log space against the largest present edge.
  RealVector logc(static_cast<std::size_t>(n), -INFINITY);
  double top = -INFINITY;
  for (int e = 0; e < n; ++e) {
    if ((mask >> e) & 1u) {
      logc[e] = params.log_conductance(x, x.shifted(Direction::from_index(e)));
      top = std::max(top, logc[e]);
    }
  }
  RealVector k(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (int e = 0; e < n; ++e) {
    if ((mask >> e) & 1u) {
      k[e] = std::exp(logc[e] - top);
      total += k[e];
    }
  }
  for (double& v : k) v /= total;
  return k;
}

std::string to_string(TransienceVerdict v) {
  switch (v) {
    case TransienceVerdict::kTransient: return "Transient";
    case TransienceVerdict::kRecurrent: return "Recurrent";
    case TransienceVerdict::kUndefined: return "Undefined";
  }
  return "Undefined";
}

Condition1Report check_condition1(const BiasDistribution& p0, const BiasDistribution& pi) {
  Condition1Report r;
  const RealVector d0 = drift(p0);
  r.part_a = d0[0] > 0.0;
  for (double dj : d0) r.part_a = r.part_a && dj >= 0.0;
  r.part_b = pi.all_positive() && p0.all_positive();
  if (pi.all_positive()) {
    const LogOddsDirection lo = log_odds(pi);
    if (!lo.degenerate()) {
      r.direction_defined = true;
      r.drift_dot_direction = dot(d0, *lo.unit);
      r.part_c = r.drift_dot_direction > 0.0;
    }
  }
  // A symmetric p_i has no log-odds direction, so (c) cannot be decided.
  if (r.part_a && r.part_b && r.direction_defined) {
    r.verdict = r.part_c ? TransienceVerdict::kTransient : TransienceVerdict::kRecurrent;
  }
  return r;
}

}  // namespace rwtrace
