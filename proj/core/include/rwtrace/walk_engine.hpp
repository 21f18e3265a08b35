#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rwtrace/bias_model.hpp"
#include "rwtrace/regeneration.hpp"
#include "rwtrace/rng.hpp"
#include "rwtrace/trace_graph.hpp"

namespace rwtrace {

// Index of the direction drawn from the weights restricted to the edges in
// mask, using the single uniform u in [0, 1).
int sample_direction(std::span<const double> weights, std::uint32_t mask, double u);

// One step of the p-walk from x. A null graph means the full lattice.
// Consumes exactly one RNG draw. Throws VertexAbsent, IsolatedVertex, or
// UnsettledNeighborhood when x is at or above g's settled level.
LatticePoint step(const BiasDistribution& p, const TraceGraph* g, const LatticePoint& x, CounterRng& rng);

// n_steps of the p0-walk on Z^d from the origin. The path's seed is the
// generator's stream key.
WalkPath simulate_level0(const BiasDistribution& p0, std::size_t n_steps, CounterRng& rng);

enum class FrontierPolicy {
  kExtend,        // parents are extended on demand
  kFixedHorizon,  // parents run their own budget only; children stop near the frontier
};

struct SimulationConfig {
  int dimension = 2;
  std::vector<BiasDistribution> biases;       // p0, p1, ..., pk
  std::vector<std::uint64_t> step_targets;    // steps each level must complete
  std::vector<std::uint64_t> step_caps;       // hard per-level caps; empty selects defaults
  double lookahead = 0.0;                     // h_la in e_1 levels; <= 0 selects 40/t0
  double truncation_tolerance = 1e-12;        // exp(-t0 h_la) must not exceed this
  double total_error_budget = 1e-6;
  std::uint64_t master_seed = 0;
  std::uint64_t replica = 0;
  FrontierPolicy policy = FrontierPolicy::kExtend;
};

// Lookahead actually used: the configured value, or max(40, -log eps_trunc)/t0
// when unset. Throws DomainError if a configured value violates the
// truncation tolerance, NoPositiveRoot if p0 has no drift along e_1.
double resolve_lookahead(const SimulationConfig& cfg);

// Default cap for level i: its own target for the deepest level, otherwise
// 100 x (sum of deeper targets) + 10^6.
std::vector<std::uint64_t> resolve_step_caps(const SimulationConfig& cfg);

struct TruncationEvent {
  int level = 0;
  std::uint64_t time = 0;
  std::int64_t settled_level = 0;
  double error_bound = 0.0;
};

struct LevelRun {
  WalkPath path;
  TraceGraph trace;  // trace of this walk, i.e. the next level's environment
  RegenerationRecord regenerations;  // direction e_1, certified with the run's lookahead
  std::uint64_t certifications = 0;
};

enum class RunStatus { kComplete, kBudgetExhausted, kHorizonReached };

std::string to_string(RunStatus status);

struct NestedRun {
  std::vector<LevelRun> levels;
  std::vector<TruncationEvent> truncation_log;
  double t0 = 0.0;
  double lookahead = 0.0;
  double per_event_bound = 0.0;   // exp(-t0 h_la)
  double total_error_bound = 0.0; // certifications x per_event_bound
  std::uint64_t frontier_violations = 0;
  RunStatus status = RunStatus::kComplete;
  int stopped_level = -1;
  std::string message;
};

// Simulates X^(0..k), each walk on the trace of the previous one. A child
// step from x requires x_1 below the parent's settled level; the parent is
// advanced until a new lookahead-certified regeneration raises it.
// Budget exhaustion is reported through NestedRun::status (never thrown) so
// partial results stay available.
NestedRun nested_simulate(const SimulationConfig& cfg);

struct VelocityEstimate {
  RealVector velocity;
  double speed = 0.0;
  double angle_degrees = 0.0;  // angle to the reference direction; NaN if undefined
  std::size_t from = 0;
  std::size_t to = 0;
};

// (X_n - X_m)/(n - m) with m = floor(burn_in * n), using the prefix of
// length n (n = 0 means the whole path). Throws PathTooShort.
VelocityEstimate velocity_estimate(const WalkPath& path, double burn_in, std::span<const double> reference,
                                   std::size_t n = 0);

inline constexpr double kDefaultBurnIn = 0.2;

struct BacktrackCensus {
  std::vector<int> depth;          // h = 0..H
  std::vector<std::uint64_t> hits; // replicas with -min X.l >= h
  std::vector<double> estimate;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> bound;       // exp(-t h)
  std::uint64_t replicas = 0;
  std::uint64_t censored = 0;      // replicas stopped by the step horizon before the stop level
  double t = 0.0;
  double stop_level = 0.0;
  double post_horizon_adjustment = 0.0; // bound on the probability mass missed after stopping
  double confidence = 0.99;
};

// Empirical tail of the backtracking depth of the p0-walk along ell. Each
// replica runs until X.l reaches H + 40/t or the step horizon.
BacktrackCensus backtrack_census(const BiasDistribution& p0, std::span<const double> ell, std::uint64_t n_replicas,
                                 std::uint64_t horizon, int max_depth, std::uint64_t master_seed,
                                 double confidence = 0.99);

struct KernelCell {
  std::uint32_t mask = 0;
  std::uint64_t visits = 0;
  std::vector<std::uint64_t> counts;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  bool flagged = false;
};

// Chi-square goodness of fit of the observed steps of path against the
// restricted kernel, grouped by local edge configuration. Cells with fewer
// than min_visits visits are skipped.
std::vector<KernelCell> kernel_goodness_of_fit(const BiasDistribution& p, const TraceGraph* env, const WalkPath& path,
                                               std::uint64_t min_visits = 10000, double flag_threshold = 1e-4);

}  // namespace rwtrace
