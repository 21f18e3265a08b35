#include "rwtrace/walk_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>

#include "rwtrace/errors.hpp"
#include "rwtrace/phase_criterion.hpp"
#include "rwtrace/stats.hpp"

namespace rwtrace {

namespace {

std::uint32_t full_mask(int dim) { return (std::uint32_t{1} << (2 * dim)) - 1; }

RealVector first_axis(int dim) {
  RealVector e(static_cast<std::size_t>(dim), 0.0);
  e[0] = 1.0;
  return e;
}

Direction step_direction(const WalkPath& path, std::size_t n) {
  for (int j = 0; j < path.dimension(); ++j) {
    const std::int64_t diff = path.coord(n + 1, j) - path.coord(n, j);
    if (diff != 0) return Direction{j, static_cast<int>(diff)};
  }
  throw Error(ErrorCode::kNonAdjacentStep, "path repeats a vertex at step " + std::to_string(n));
}

}  // namespace

int sample_direction(std::span<const double> weights, std::uint32_t mask, double u) {
  double total = 0.0;
  for (std::uint32_t m = mask; m; m &= m - 1) total += weights[std::countr_zero(m)];
  if (!(total > 0.0)) return -1;
  double target = u * total;
  int last = -1;
  for (std::uint32_t m = mask; m; m &= m - 1) {
    const int k = std::countr_zero(m);
    if (weights[k] <= 0.0) continue;
    last = k;
    target -= weights[k];
    if (target < 0.0) return k;
  }
  return last;
}

LatticePoint step(const BiasDistribution& p, const TraceGraph* g, const LatticePoint& x, CounterRng& rng) {
  std::uint32_t mask = full_mask(p.dimension());
  if (g != nullptr) {
    const VertexId id = g->find(x);
    if (id == kNoVertex) throw Error(ErrorCode::kVertexAbsent, x.to_string() + " is not in the graph");
    if (!g->is_settled(x)) {
      throw Error(ErrorCode::kUnsettledNeighborhood,
                  x.to_string() + " is not below the settled level " + std::to_string(g->settled_level()));
    }
    mask = g->adjacency(id);
  }
  const double u = rng.uniform();
  const int k = sample_direction(p.weights(), mask, u);
  if (k < 0) throw Error(ErrorCode::kIsolatedVertex, x.to_string() + " has no edge of positive weight");
  return x.shifted(Direction::from_index(k));
}

WalkPath simulate_level0(const BiasDistribution& p0, std::size_t n_steps, CounterRng& rng) {
  WalkPath path(p0.dimension(), rng.key(), 0);
  path.reserve(n_steps + 1);
  const std::uint32_t mask = full_mask(p0.dimension());
  const auto w = p0.weights();
  for (std::size_t n = 0; n < n_steps; ++n) {
    path.push_step(Direction::from_index(sample_direction(w, mask, rng.uniform())));
  }
  return path;
}

double resolve_lookahead(const SimulationConfig& cfg) {
  if (cfg.biases.empty()) throw Error(ErrorCode::kConfigError, "no bias distributions");
  if (!(cfg.truncation_tolerance > 0.0 && cfg.truncation_tolerance < 1.0)) {
    throw Error(ErrorCode::kDomainError, "truncation tolerance must be in (0,1)");
  }
  const RealVector e1 = first_axis(cfg.biases.front().dimension());
  const double t0 = solve_root(cfg.biases.front(), e1);
  if (cfg.lookahead <= 0.0) return std::max(40.0, -std::log(cfg.truncation_tolerance)) / t0;
  if (std::exp(-t0 * cfg.lookahead) > cfg.truncation_tolerance) {
    throw Error(ErrorCode::kDomainError, "lookahead " + std::to_string(cfg.lookahead) +
                                             " gives a per-event bound above the truncation tolerance");
  }
  return cfg.lookahead;
}

std::vector<std::uint64_t> resolve_step_caps(const SimulationConfig& cfg) {
  const std::size_t levels = cfg.biases.size();
  if (cfg.step_targets.size() != levels) throw Error(ErrorCode::kConfigError, "one step target per level required");
  if (!cfg.step_caps.empty()) {
    if (cfg.step_caps.size() != levels) throw Error(ErrorCode::kConfigError, "one step cap per level required");
    for (std::size_t i = 0; i < levels; ++i) {
      if (cfg.step_caps[i] < cfg.step_targets[i]) throw Error(ErrorCode::kConfigError, "step cap below step target");
    }
    return cfg.step_caps;
  }
  std::vector<std::uint64_t> caps(levels);
  std::uint64_t deeper = 0;
  for (std::size_t i = levels; i-- > 0;) {
    caps[i] = (i + 1 == levels) ? cfg.step_targets[i]
                                : std::max(cfg.step_targets[i], 100 * deeper + 1000000);
    deeper += cfg.step_targets[i];
  }
  return caps;
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kComplete: return "complete";
    case RunStatus::kBudgetExhausted: return "budget_exhausted";
    case RunStatus::kHorizonReached: return "horizon_reached";
  }
  return "unknown";
}

namespace {

struct Candidate {
  std::int64_t level;
  std::uint64_t time;
};

struct BudgetHit {
  int level;
};

// Driver for one nested run. Level i walks on levels[i-1].trace.
class NestedDriver {
 public:
  NestedDriver(const SimulationConfig& cfg, NestedRun& run, std::vector<std::uint64_t> caps)
      : cfg_(cfg), run_(run), caps_(std::move(caps)) {
    const int d = cfg.dimension;
    for (std::size_t i = 0; i < cfg.biases.size(); ++i) {
      LevelRun lr{WalkPath(d, derive_stream_key(cfg.master_seed, i, cfg.replica), static_cast<int>(i)),
                  TraceGraph(d), RegenerationRecord{}, 0};
      run_.levels.push_back(std::move(lr));
      state_.push_back(State{make_stream(cfg.master_seed, i, cfg.replica), {}, std::numeric_limits<std::int64_t>::min(),
                             LatticePoint(d)});
      state_.back().frontier.push_back({0, 0});
      state_.back().max1 = 0;
    }
  }

  std::uint64_t steps(std::size_t i) const { return run_.levels[i].path.steps(); }

  // Performs one step of level i, extending ancestors on demand.
  // Returns false when the fixed-horizon policy blocks the step.
  bool advance(std::size_t i) {
    if (steps(i) >= caps_[i]) throw BudgetHit{static_cast<int>(i)};
    State& s = state_[i];
    const TraceGraph* env = nullptr;
    if (i > 0) {
      const TraceGraph& parent = run_.levels[i - 1].trace;
      while (!parent.is_settled(s.x)) {
        if (cfg_.policy == FrontierPolicy::kFixedHorizon) return false;
        advance(i - 1);
      }
      env = &parent;
    }
    const LatticePoint next = step(cfg_.biases[i], env, s.x, s.rng);
    record(i, next);
    return true;
  }

 private:
  struct State {
    CounterRng rng;
    std::deque<Candidate> frontier;
    std::int64_t max1;
    LatticePoint x;
  };

  void record(std::size_t i, const LatticePoint& next) {
    LevelRun& lr = run_.levels[i];
    State& s = state_[i];
    Direction dir;
    adjacent_direction(s.x, next, &dir);
    // Audit: a step touching structure below the settled level changes
    // what a child may already have consulted.
    if (static_cast<double>(std::min(s.x[0], next[0])) < lr.trace.settled_level()) ++run_.frontier_violations;
    lr.path.push_step(dir);
    lr.trace.append_step(dir);
    s.x = next;
    const std::int64_t x1 = next[0];
    const std::uint64_t time = lr.path.steps();
    while (!s.frontier.empty() && s.frontier.back().level > x1) s.frontier.pop_back();
    if (x1 > s.max1) {
      s.max1 = x1;
      s.frontier.push_back({x1, time});
    }
    while (!s.frontier.empty() && static_cast<double>(s.frontier.front().level) + run_.lookahead <= static_cast<double>(x1)) {
      const Candidate c = s.frontier.front();
      s.frontier.pop_front();
      lr.trace.certify_settled(static_cast<double>(c.level));
      ++lr.certifications;
      run_.truncation_log.push_back(TruncationEvent{static_cast<int>(i), time, c.level, run_.per_event_bound});
    }
  }

  const SimulationConfig& cfg_;
  NestedRun& run_;
  std::vector<std::uint64_t> caps_;
  std::vector<State> state_;
};

}  // namespace

NestedRun nested_simulate(const SimulationConfig& cfg) {
  if (cfg.dimension < 1 || cfg.dimension > kMaxDimension) throw Error(ErrorCode::kConfigError, "bad dimension");
  for (const auto& p : cfg.biases) {
    if (p.dimension() != cfg.dimension) throw Error(ErrorCode::kConfigError, "bias dimension mismatch");
  }
  NestedRun run;
  run.lookahead = resolve_lookahead(cfg);
  run.t0 = solve_root(cfg.biases.front(), first_axis(cfg.dimension));
  run.per_event_bound = std::exp(-run.t0 * run.lookahead);
  std::vector<std::uint64_t> caps = resolve_step_caps(cfg);
  NestedDriver driver(cfg, run, caps);
  const std::size_t levels = cfg.biases.size();

  try {
    if (cfg.policy == FrontierPolicy::kExtend) {
      for (std::size_t i = levels; i-- > 0;) {
        while (driver.steps(i) < cfg.step_targets[i]) driver.advance(i);
      }
    } else {
      for (std::size_t i = 0; i < levels; ++i) {
        while (driver.steps(i) < cfg.step_targets[i]) {
          if (!driver.advance(i)) {
            run.status = RunStatus::kHorizonReached;
            if (run.stopped_level < 0) {
              run.stopped_level = static_cast<int>(i);
              run.message = "level " + std::to_string(i) + " reached its parent's settled frontier after " +
                            std::to_string(driver.steps(i)) + " steps";
            }
            break;
          }
        }
      }
    }
  } catch (const BudgetHit& hit) {
    run.status = RunStatus::kBudgetExhausted;
    run.stopped_level = hit.level;
    run.message = "level " + std::to_string(hit.level) + " exhausted its step cap of " +
                  std::to_string(caps[static_cast<std::size_t>(hit.level)]);
  }

  std::uint64_t certifications = 0;
  const RealVector e1 = first_axis(cfg.dimension);
  for (LevelRun& lr : run.levels) {
    certifications += lr.certifications;
    lr.regenerations = regenerations(lr.path, e1, run.lookahead, run.per_event_bound);
  }
  run.total_error_bound = static_cast<double>(certifications) * run.per_event_bound;
  if (run.total_error_bound > cfg.total_error_budget && run.message.empty()) {
    run.message = "logged truncation error exceeds the configured budget";
  }
  return run;
}

VelocityEstimate velocity_estimate(const WalkPath& path, double burn_in, std::span<const double> reference,
                                   std::size_t n) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw Error(ErrorCode::kDomainError, "burn-in fraction must be in [0,1)");
  if (n == 0) n = path.steps();
  if (n > path.steps()) throw Error(ErrorCode::kPathTooShort, "path has fewer than " + std::to_string(n) + " steps");
  const auto m = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(n)));
  if (n == 0 || m >= n) throw Error(ErrorCode::kPathTooShort, "no steps after the burn-in window");
  VelocityEstimate est;
  est.from = m;
  est.to = n;
  est.velocity.resize(static_cast<std::size_t>(path.dimension()));
  for (int j = 0; j < path.dimension(); ++j) {
    est.velocity[j] = static_cast<double>(path.coord(n, j) - path.coord(m, j)) / static_cast<double>(n - m);
  }
  est.speed = euclidean_norm(est.velocity);
  const double rn = euclidean_norm(reference);
  if (est.speed > 0.0 && rn > 0.0 && reference.size() == est.velocity.size()) {
    const double c = std::clamp(dot(est.velocity, reference) / (est.speed * rn), -1.0, 1.0);
    est.angle_degrees = std::acos(c) * 180.0 / std::numbers::pi;
  } else {
    est.angle_degrees = std::numeric_limits<double>::quiet_NaN();
  }
  return est;
}

BacktrackCensus backtrack_census(const BiasDistribution& p0, std::span<const double> ell, std::uint64_t n_replicas,
                                 std::uint64_t horizon, int max_depth, std::uint64_t master_seed, double confidence) {
  if (max_depth < 0) throw Error(ErrorCode::kDomainError, "max depth must be non-negative");
  BacktrackCensus out;
  out.t = solve_root(p0, ell);
  out.confidence = confidence;
  out.replicas = n_replicas;
  out.stop_level = static_cast<double>(max_depth) + 40.0 / out.t;
  out.post_horizon_adjustment = std::exp(-out.t * out.stop_level);
  std::vector<double> proj(static_cast<std::size_t>(2 * p0.dimension()));
  for (int k = 0; k < 2 * p0.dimension(); ++k) {
    const Direction dir = Direction::from_index(k);
    proj[k] = dir.sign * ell[static_cast<std::size_t>(dir.axis)];
  }
  std::vector<std::uint64_t> tally(static_cast<std::size_t>(max_depth) + 1, 0);
  const std::uint32_t mask = full_mask(p0.dimension());
  const auto w = p0.weights();
  for (std::uint64_t r = 0; r < n_replicas; ++r) {
    CounterRng rng = make_stream(master_seed, 0, r);
    double pos = 0.0;
    double lowest = 0.0;
    std::uint64_t n = 0;
    for (; n < horizon && pos < out.stop_level; ++n) {
      pos += proj[static_cast<std::size_t>(sample_direction(w, mask, rng.uniform()))];
      lowest = std::min(lowest, pos);
    }
    if (pos < out.stop_level) ++out.censored;
    const double depth = -lowest;
    for (int h = 0; h <= max_depth && depth >= h - 1e-9; ++h) ++tally[static_cast<std::size_t>(h)];
  }
  const double z = normal_quantile_two_sided(confidence);
  for (int h = 0; h <= max_depth; ++h) {
    const std::uint64_t k = tally[static_cast<std::size_t>(h)];
    out.depth.push_back(h);
    out.hits.push_back(k);
    out.estimate.push_back(n_replicas ? static_cast<double>(k) / static_cast<double>(n_replicas) : 0.0);
    const auto [lo, hi] = wilson_interval(k, n_replicas, z);
    out.ci_low.push_back(lo);
    out.ci_high.push_back(hi);
    out.bound.push_back(std::exp(-out.t * h));
  }
  return out;
}

std::vector<KernelCell> kernel_goodness_of_fit(const BiasDistribution& p, const TraceGraph* env, const WalkPath& path,
                                               std::uint64_t min_visits, double flag_threshold) {
  const int nd = 2 * p.dimension();
  std::map<std::uint32_t, KernelCell> cells;
  const std::uint32_t full = full_mask(p.dimension());
  for (std::size_t n = 0; n + 1 < path.size(); ++n) {
    std::uint32_t mask = full;
    if (env != nullptr) {
      const VertexId id = env->find(path.coords(n));
      if (id == kNoVertex) throw Error(ErrorCode::kVertexAbsent, "path leaves the environment at step " + std::to_string(n));
      mask = env->adjacency(id);
    }
    KernelCell& cell = cells[mask];
    if (cell.counts.empty()) {
      cell.mask = mask;
      cell.counts.assign(static_cast<std::size_t>(nd), 0);
    }
    ++cell.visits;
    ++cell.counts[static_cast<std::size_t>(step_direction(path, n).index())];
  }
  std::vector<KernelCell> out;
  for (auto& [mask, cell] : cells) {
    if (cell.visits < min_visits) continue;
    double total = 0.0;
    int support = 0;
    for (int k = 0; k < nd; ++k) {
      if ((mask >> k) & 1u && p.weight(k) > 0.0) {
        total += p.weight(k);
        ++support;
      }
    }
    double chi = 0.0;
    for (int k = 0; k < nd; ++k) {
      if (!((mask >> k) & 1u) || p.weight(k) <= 0.0) continue;
      const double expected = static_cast<double>(cell.visits) * p.weight(k) / total;
      const double diff = static_cast<double>(cell.counts[static_cast<std::size_t>(k)]) - expected;
      chi += diff * diff / expected;
    }
    cell.chi_square = chi;
    cell.degrees_of_freedom = support - 1;
    cell.p_value = chi_square_sf(chi, cell.degrees_of_freedom);
    cell.flagged = cell.p_value < flag_threshold;
    out.push_back(cell);
  }
  return out;
}

}  // namespace rwtrace
