#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rwtrace/lattice.hpp"
#include "rwtrace/trace_graph.hpp"

namespace rwtrace {

// Regeneration times of a finite path in direction ell: times T at which the
// projection X_T.ell is a strict new maximum that is never undercut later in
// the observed path and that the path exceeds by at least the lookahead.
// New maxima that are not undercut but whose window runs past the end of the
// path are listed as unresolved and excluded from every statistic.
struct RegenerationRecord {
  std::vector<double> direction;
  std::vector<std::size_t> times;
  std::vector<double> levels;
  std::vector<std::size_t> unresolved;
  double lookahead = 0.0;
  double per_event_bound = 0.0;  // caller-supplied bound on each certification's error
};

RegenerationRecord regenerations(const WalkPath& path, std::span<const double> ell, double lookahead,
                                 double per_event_bound = 0.0);

struct GapStatistics {
  std::size_t blocks = 0;
  double mean = 0.0;
  double variance = 0.0;
  double lag1_autocorrelation = 0.0;
  double first_half_mean = 0.0;
  double second_half_mean = 0.0;
};

// Statistics of consecutive differences of a level sequence.
GapStatistics gap_statistics(std::span<const double> levels);

struct UberLevels {
  std::vector<std::int64_t> levels;  // strictly positive, increasing
  std::vector<std::size_t> times;    // first hitting time of each level by the deepest walk
  std::vector<LatticePoint> points;  // the deepest walk's position at those times
};

// Levels > 0 that are regeneration levels of every record (all in direction
// e_1). records[i] must belong to paths[i]; points refer to the last path.
UberLevels uber_levels(std::span<const RegenerationRecord> records, std::span<const WalkPath> paths);

// Indices n' with {X_m : m <= n'} and {X_m : m > n'} disjoint, in O(n).
std::vector<std::size_t> cut_points(const WalkPath& path);

// Only the cut points whose past lies strictly below settled_level in the
// first coordinate; those cannot be invalidated by a continuation of the walk
// that stays above the frontier.
std::vector<std::size_t> cut_points(const WalkPath& path, double settled_level);

struct TrapWitness {
  std::size_t block = 0;  // 0-based block index; block b spans [T_{b+1}, T_{b+2}] in 1-based regeneration numbering
  std::size_t m = 0;
  std::size_t n = 0;
  std::int64_t height = 0;
};

// For each certified block [T_j, T_{j+1}], the trap heights
// floor((X_m - X_n).ell) >= 1 realised by cut points m <= n of the block,
// each with its first witness pair.
struct TrapProfile {
  std::size_t blocks = 0;
  std::vector<std::vector<TrapWitness>> per_block;  // sorted by height

  bool occurs(std::size_t block, std::int64_t h) const;
  const TrapWitness* witness(std::size_t block, std::int64_t h) const;
};

TrapProfile trap_profile(const WalkPath& path, const RegenerationRecord& record, std::span<const double> ell);

struct TrapCensus {
  std::int64_t height = 0;
  std::size_t blocks = 0;
  std::vector<TrapWitness> traps;  // one per block in which the event occurs

  double frequency() const { return blocks ? static_cast<double>(traps.size()) / static_cast<double>(blocks) : 0.0; }
};

// Occurrences of the trap event of height h (h >= 1) across blocks.
TrapCensus trap_events(const WalkPath& path, const RegenerationRecord& record, std::span<const double> ell,
                       std::int64_t h);
TrapCensus trap_events(const TrapProfile& profile, std::int64_t h);

// Integer trap height used at scale n: max(1, floor((1 - eps) log n / t)).
std::int64_t trap_height(std::size_t n, double epsilon, double t);

struct TrapScaling {
  std::size_t n = 0;
  double epsilon = 0.0;
  double height_real = 0.0;
  std::int64_t height = 0;
  double threshold = 0.0;  // n^{eps/2}
  std::vector<std::uint64_t> counts;
  std::size_t rejected = 0;  // replicas with fewer than n - 1 certified blocks
  double fraction_exceeding = 0.0;
};

// N_{n,eps} = #{j in 1..n-1 : trap event of height h_{n,eps} in block j} per
// replica. Replicas with fewer than n - 1 blocks are rejected; throws
// InsufficientBlocks if none remain.
TrapScaling trap_scaling(std::span<const TrapProfile> ensemble, std::size_t n, double epsilon, double t);

}  // namespace rwtrace
