#include "rwtrace/regeneration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <set>

#include "rwtrace/errors.hpp"

namespace rwtrace {

namespace {

// Projections of lattice points on a unit vector are exact for coordinate
// directions; the guard absorbs rounding for general directions.
constexpr double kGuard = 1e-9;

std::vector<double> projections(const WalkPath& path, std::span<const double> ell) {
  if (ell.size() != static_cast<std::size_t>(path.dimension())) {
    throw Error(ErrorCode::kDomainError, "direction has wrong dimension");
  }
  std::vector<double> proj(path.size());
  for (std::size_t n = 0; n < path.size(); ++n) proj[n] = path.projection(n, ell);
  return proj;
}

bool is_first_axis(std::span<const double> ell) {
  if (ell.empty() || ell[0] != 1.0) return false;
  for (std::size_t j = 1; j < ell.size(); ++j) {
    if (ell[j] != 0.0) return false;
  }
  return true;
}

}  // namespace

RegenerationRecord regenerations(const WalkPath& path, std::span<const double> ell, double lookahead,
                                 double per_event_bound) {
  RegenerationRecord rec;
  rec.direction.assign(ell.begin(), ell.end());
  rec.lookahead = lookahead;
  rec.per_event_bound = per_event_bound;
  const std::vector<double> proj = projections(path, ell);
  const std::size_t n = proj.size();
  // suffix_min[k] / suffix_max[k] over proj[k..n-1]; index n is the empty suffix.
  std::vector<double> suffix_min(n + 1, INFINITY);
  std::vector<double> suffix_max(n + 1, -INFINITY);
  for (std::size_t k = n; k-- > 0;) {
    suffix_min[k] = std::min(suffix_min[k + 1], proj[k]);
    suffix_max[k] = std::max(suffix_max[k + 1], proj[k]);
  }
  double running_max = -INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    if (proj[k] <= running_max + kGuard) continue;
    running_max = proj[k];
    if (suffix_min[k + 1] < proj[k] - kGuard) continue;
    if (suffix_max[k + 1] >= proj[k] + lookahead - kGuard) {
      rec.times.push_back(k);
      rec.levels.push_back(proj[k]);
    } else {
      rec.unresolved.push_back(k);
    }
  }
  return rec;
}

GapStatistics gap_statistics(std::span<const double> levels) {
  GapStatistics st;
  if (levels.size() < 2) return st;
  std::vector<double> gaps;
  gaps.reserve(levels.size() - 1);
  for (std::size_t k = 1; k < levels.size(); ++k) gaps.push_back(levels[k] - levels[k - 1]);
  st.blocks = gaps.size();
  double sum = 0.0;
  for (double g : gaps) sum += g;
  st.mean = sum / static_cast<double>(gaps.size());
  double ss = 0.0;
  for (double g : gaps) ss += (g - st.mean) * (g - st.mean);
  st.variance = gaps.size() > 1 ? ss / static_cast<double>(gaps.size() - 1) : 0.0;
  if (gaps.size() > 2 && ss > 0.0) {
    double cross = 0.0;
    for (std::size_t k = 1; k < gaps.size(); ++k) cross += (gaps[k] - st.mean) * (gaps[k - 1] - st.mean);
    st.lag1_autocorrelation = cross / ss;
  }
  const std::size_t half = gaps.size() / 2;
  if (half > 0) {
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < half; ++k) a += gaps[k];
    for (std::size_t k = half; k < gaps.size(); ++k) b += gaps[k];
    st.first_half_mean = a / static_cast<double>(half);
    st.second_half_mean = b / static_cast<double>(gaps.size() - half);
  }
  return st;
}

UberLevels uber_levels(std::span<const RegenerationRecord> records, std::span<const WalkPath> paths) {
  if (records.empty() || records.size() != paths.size()) {
    throw Error(ErrorCode::kDomainError, "need one regeneration record per path");
  }
  for (const auto& rec : records) {
    if (!is_first_axis(rec.direction)) throw Error(ErrorCode::kDomainError, "uber levels need records in direction e_1");
  }
  // Levels of the deepest walk, with their times; then intersect.
  std::map<std::int64_t, std::size_t> candidate;
  const RegenerationRecord& deepest = records.back();
  for (std::size_t k = 0; k < deepest.levels.size(); ++k) {
    const auto level = static_cast<std::int64_t>(std::llround(deepest.levels[k]));
    if (level > 0) candidate.emplace(level, deepest.times[k]);
  }
  for (std::size_t r = 0; r + 1 < records.size(); ++r) {
    std::set<std::int64_t> own;
    for (double l : records[r].levels) own.insert(static_cast<std::int64_t>(std::llround(l)));
    for (auto it = candidate.begin(); it != candidate.end();) {
      it = own.count(it->first) ? std::next(it) : candidate.erase(it);
    }
  }
  UberLevels out;
  for (const auto& [level, time] : candidate) {
    out.levels.push_back(level);
    out.times.push_back(time);
    out.points.push_back(paths.back().point(time));
  }
  return out;
}

std::vector<std::size_t> cut_points(const WalkPath& path) {
  const std::size_t n = path.size();
  // Vertex ids in order of first visit, via the trace's hash index.
  TraceGraph trace(path.dimension());
  std::vector<std::size_t> first{0};
  std::vector<std::size_t> last{0};
  for (std::size_t k = 1; k < n; ++k) {
    int axis = 0;
    int sign = 1;
    for (int j = 0; j < path.dimension(); ++j) {
      const std::int64_t diff = path.coord(k, j) - path.coord(k - 1, j);
      if (diff != 0) {
        axis = j;
        sign = static_cast<int>(diff);
      }
    }
    const VertexId id = trace.append_step(Direction{axis, sign});
    if (id == first.size()) {
      first.push_back(k);
      last.push_back(k);
    } else {
      last[id] = k;
    }
  }
  // n' is a cut point iff no vertex has first <= n' < last.
  std::vector<std::int64_t> cover(n + 1, 0);
  for (std::size_t v = 0; v < first.size(); ++v) {
    if (last[v] > first[v]) {
      ++cover[first[v]];
      --cover[last[v]];
    }
  }
  std::vector<std::size_t> out;
  std::int64_t running = 0;
  for (std::size_t k = 0; k < n; ++k) {
    running += cover[k];
    if (running == 0) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> cut_points(const WalkPath& path, double settled_level) {
  std::vector<std::size_t> all = cut_points(path);
  std::vector<std::size_t> out;
  std::int64_t past_max = std::numeric_limits<std::int64_t>::min();
  std::size_t k = 0;
  for (std::size_t c : all) {
    for (; k <= c; ++k) past_max = std::max(past_max, path.coord(k, 0));
    if (static_cast<double>(past_max) < settled_level) out.push_back(c);
  }
  return out;
}

bool TrapProfile::occurs(std::size_t block, std::int64_t h) const { return witness(block, h) != nullptr; }

const TrapWitness* TrapProfile::witness(std::size_t block, std::int64_t h) const {
  const auto& w = per_block.at(block);
  auto it = std::lower_bound(w.begin(), w.end(), h, [](const TrapWitness& a, std::int64_t v) { return a.height < v; });
  return (it != w.end() && it->height == h) ? &*it : nullptr;
}

TrapProfile trap_profile(const WalkPath& path, const RegenerationRecord& record, std::span<const double> ell) {
  const std::vector<double> proj = projections(path, ell);
  const std::vector<std::size_t> cuts = cut_points(path);
  TrapProfile prof;
  if (record.times.size() < 2) return prof;
  prof.blocks = record.times.size() - 1;
  prof.per_block.resize(prof.blocks);
  for (std::size_t b = 0; b < prof.blocks; ++b) {
    const std::size_t lo = record.times[b];
    const std::size_t hi = record.times[b + 1];
    auto first = std::lower_bound(cuts.begin(), cuts.end(), lo);
    auto last = std::upper_bound(cuts.begin(), cuts.end(), hi);
    std::map<std::int64_t, TrapWitness> found;
    for (auto a = first; a != last; ++a) {
      for (auto c = a; c != last; ++c) {
        const auto height = static_cast<std::int64_t>(std::floor(proj[*a] - proj[*c] + kGuard));
        if (height >= 1 && !found.count(height)) found.emplace(height, TrapWitness{b, *a, *c, height});
      }
    }
    for (const auto& [h, w] : found) prof.per_block[b].push_back(w);
  }
  return prof;
}

TrapCensus trap_events(const TrapProfile& profile, std::int64_t h) {
  if (h < 1) throw Error(ErrorCode::kDomainError, "trap height must be >= 1");
  TrapCensus c;
  c.height = h;
  c.blocks = profile.blocks;
  for (std::size_t b = 0; b < profile.blocks; ++b) {
    if (const TrapWitness* w = profile.witness(b, h)) c.traps.push_back(*w);
  }
  return c;
}

TrapCensus trap_events(const WalkPath& path, const RegenerationRecord& record, std::span<const double> ell,
                       std::int64_t h) {
  if (h < 1) throw Error(ErrorCode::kDomainError, "trap height must be >= 1");
  return trap_events(trap_profile(path, record, ell), h);
}

std::int64_t trap_height(std::size_t n, double epsilon, double t) {
  if (n < 2 || !(epsilon > 0.0 && epsilon < 1.0) || !(t > 0.0)) {
    throw Error(ErrorCode::kDomainError, "trap height needs n >= 2, eps in (0,1), t > 0");
  }
  const double h = (1.0 - epsilon) * std::log(static_cast<double>(n)) / t;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(h)));
}

TrapScaling trap_scaling(std::span<const TrapProfile> ensemble, std::size_t n, double epsilon, double t) {
  TrapScaling out;
  out.n = n;
  out.epsilon = epsilon;
  out.height = trap_height(n, epsilon, t);
  out.height_real = (1.0 - epsilon) * std::log(static_cast<double>(n)) / t;
  out.threshold = std::pow(static_cast<double>(n), epsilon / 2.0);
  std::size_t exceeding = 0;
  for (const TrapProfile& prof : ensemble) {
    if (prof.blocks < n - 1) {
      ++out.rejected;
      continue;
    }
    std::uint64_t count = 0;
    for (std::size_t b = 0; b + 1 < n; ++b) count += prof.occurs(b, out.height) ? 1 : 0;
    out.counts.push_back(count);
    if (static_cast<double>(count) >= out.threshold) ++exceeding;
  }
  if (out.counts.empty()) {
    throw Error(ErrorCode::kInsufficientBlocks, "no replica has " + std::to_string(n - 1) + " certified blocks");
  }
  out.fraction_exceeding = static_cast<double>(exceeding) / static_cast<double>(out.counts.size());
  return out;
}

}  // namespace rwtrace
