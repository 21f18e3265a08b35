#pragma once

#include <span>
#include <string>
#include <vector>

#include "rwtrace/bias_model.hpp"

namespace rwtrace {

// One-step moment generating function of -X_1 . l under p0:
//   phi(t) = sum_e p0(e) exp(-t e.l).
double phi(const BiasDistribution& p0, std::span<const double> ell, double t);
double phi_derivative(const BiasDistribution& p0, std::span<const double> ell, double t);

inline constexpr double kDefaultRootTolerance = 1e-12;

// Unique positive root of phi(t) = 1. Upper bracket found by doubling from
// t = 1, then bisection until the bracket is narrower than tol.
// Throws NoPositiveRoot if delta0 . l <= 0, NonConvergence if the bracket
// cannot be narrowed to tol within the iteration cap.
double solve_root(const BiasDistribution& p0, std::span<const double> ell, double tol = kDefaultRootTolerance);

// Closed-form root for the canonical family p(e) proportional to
// 1 + (gamma-1)[e in {e_1..e_k}]:  sqrt(ki) log(1 + (ki ^ k0)(gamma0-1)/ki).
double example13_root(int d, int k0, int ki, double gamma0, double gammai);

// delta_hat = sum_e p0(e) exp(-t e.l) e.
RealVector trap_drift(const BiasDistribution& p0, std::span<const double> ell, double t);

struct RateFunctionResult {
  double value = 0.0;
  RealVector maximiser;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Legendre transform sup_x (x.target - log E[exp(X_1 . x)]) by damped Newton
// ascent on the concave objective, stopping at gradient norm 1e-10.
// Throws TargetOutsideHull unless target lies in the interior of the convex
// hull of the support; NonConvergence on iteration cap.
RateFunctionResult rate_function(const BiasDistribution& p0, std::span<const double> target);

// Lundberg bound exp(-t h) on P(-min_n X_n . l >= h).
double backtrack_bound(const BiasDistribution& p0, std::span<const double> ell, double h);

enum class Phase { kBallistic, kSubBallistic, kCritical, kUndefined };

std::string to_string(Phase phase);

inline constexpr double kDefaultCriticalTolerance = 1e-9;

struct PhaseReport {
  RealVector drift0;
  RealVector drift;       // delta of p_i
  RealVector log_odds;    // raw l-hat of p_i (empty if p_i has a zero weight)
  RealVector direction;   // unit l of p_i (empty when undefined)
  double beta = 1.0;
  double t = 0.0;
  double alpha = 1.0;
  Phase phase = Phase::kUndefined;
  Condition1Report condition1;
  RealVector trap_drift;
  double trap_drift_dot_direction = 0.0;
  double lambda_value = 0.0;      // -t (l . delta_hat)
  double lambda_numeric = 0.0;    // sup computation of the same quantity
  double critical_tolerance = kDefaultCriticalTolerance;
  std::string diagnostic;

  // Flat key=value lines, one field per line.
  std::string to_key_values() const;
};

// Ballistic iff beta < alpha, sub-ballistic iff beta > alpha, Critical when
// |beta - alpha| <= tol * alpha. Condition-1 failures give Phase::kUndefined
// with the report attached.
PhaseReport classify(const BiasDistribution& p0, const BiasDistribution& pi, double tol = kDefaultCriticalTolerance);

// (c(0,e_1)/c(0,e)) * min{1, (beta^{c delta0.l} - 1) beta^c}.
double simplicity_summand(const BiasDistribution& pi, const BiasDistribution& p0, Direction e, double c);

enum class SeriesTrend { kSummable, kDivergent, kInconclusive };

std::string to_string(SeriesTrend trend);

struct SeriesReport {
  std::vector<double> terms;
  std::vector<double> partial_sums;
  double tail_ratio = 0.0;  // geometric-mean ratio of consecutive terms over the last half
  SeriesTrend trend = SeriesTrend::kInconclusive;
};

// Ratio-test heuristic over the supplied prefix only: tail ratio <= 0.9 is
// reported summable, >= 1 divergent, anything else inconclusive.
SeriesReport simplicity_series(std::span<const BiasDistribution> pseq, const BiasDistribution& p0, Direction e, double c,
                               std::size_t n_terms);

}  // namespace rwtrace
