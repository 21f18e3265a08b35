#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwtrace/lattice.hpp"
#include "rwtrace/trace_graph.hpp"

namespace rwtrace {

using RealVector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double euclidean_norm(std::span<const double> a);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

// Step law over the 2d signed unit directions, indexed as in Direction.
class BiasDistribution {
 public:
  // Throws InvalidDistribution unless there are 2d non-negative weights
  // summing to 1 within 1e-12.
  BiasDistribution(int dimension, std::vector<double> weights);

  // Exact path for fixtures: the rationals must sum to exactly 1.
  static BiasDistribution from_rationals(int dimension, std::span<const Rational> weights);

  static BiasDistribution symmetric(int dimension);

  int dimension() const { return dim_; }
  double weight(Direction dir) const { return weights_[dir.index()]; }
  double weight(int index) const { return weights_[index]; }
  std::span<const double> weights() const { return weights_; }

  // Condition-1(b): every direction has positive weight.
  bool all_positive() const;

  std::string to_string() const;

  friend bool operator==(const BiasDistribution&, const BiasDistribution&) = default;

 private:
  int dim_;
  std::vector<double> weights_;
};

// delta_j = p(e_j) - p(-e_j).
RealVector drift(const BiasDistribution& p);

struct LogOddsDirection {
  RealVector raw;                 // log(p(e_j)/p(-e_j))
  std::optional<RealVector> unit; // empty when raw == 0
  double beta = 1.0;              // exp(|raw|)

  bool degenerate() const { return !unit.has_value(); }
};

// Throws ZeroWeight if any weight is zero.
LogOddsDirection log_odds(const BiasDistribution& p);

// Edge weights making the restricted p-walk a reversible network walk:
//   c(x,y) = prod_j c_j^{|y_j-x_j|} * beta^{(x v y).l}
// Evaluated in log space: beta^{z.l} = exp(z . raw log-odds).
class ConductanceParams {
 public:
  explicit ConductanceParams(const BiasDistribution& p);

  int dimension() const { return static_cast<int>(c_.size()); }
  std::span<const double> c() const { return c_; }
  double beta() const { return log_odds_.beta; }
  const LogOddsDirection& direction() const { return log_odds_; }

  // Throws NotAdjacent unless |x - y| = 1.
  double log_conductance(const LatticePoint& x, const LatticePoint& y) const;
  double conductance(const LatticePoint& x, const LatticePoint& y) const;

 private:
  RealVector c_;
  RealVector log_c_;
  LogOddsDirection log_odds_;
};

double conductance(const ConductanceParams& params, const LatticePoint& x, const LatticePoint& y);

// Transition law of the p-walk restricted to g at x, as 2d probabilities in
// direction order. Throws VertexAbsent / IsolatedVertex.
RealVector restricted_kernel(const BiasDistribution& p, const TraceGraph& g, const LatticePoint& x);

// Same law written as c(x,x+e)/c(x) over present edges.
RealVector conductance_kernel(const ConductanceParams& params, const TraceGraph& g, const LatticePoint& x);

enum class TransienceVerdict { kTransient, kRecurrent, kUndefined };

std::string to_string(TransienceVerdict v);

struct Condition1Report {
  bool part_a = false;  // delta0_j >= 0 for all j, delta0_1 > 0
  bool part_b = false;  // all weights of p_i positive
  bool part_c = false;  // delta0 . l_i > 0
  bool direction_defined = false;    // l_i exists (p_i positive and not symmetric)
  double drift_dot_direction = 0.0;  // delta0 . l_i (0 when undefined)
  TransienceVerdict verdict = TransienceVerdict::kUndefined;
};

Condition1Report check_condition1(const BiasDistribution& p0, const BiasDistribution& pi);

}  // namespace rwtrace
