#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rwtrace/errors.hpp"
#include "rwtrace/presets.hpp"
#include "rwtrace/regeneration.hpp"
#include "rwtrace/walk_engine.hpp"

namespace rwtrace {
namespace {

const std::vector<double> kE1{1.0, 0.0};

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kIoError;
}

WalkPath straight(int d, std::size_t n) {
  WalkPath p(d);
  for (std::size_t k = 0; k < n; ++k) p.push_step({0, +1});
  return p;
}

WalkPath from_steps(const std::vector<Direction>& steps) {
  WalkPath p(2);
  for (auto s : steps) p.push_step(s);
  return p;
}

// Quadratic oracle: n' is a cut point unless some pair m <= n' < k has X_m = X_k.
std::vector<std::size_t> brute_force_cut_points(const WalkPath& path) {
  const std::size_t n = path.size();
  std::vector<char> ok(n, 1);
  for (std::size_t k = 1; k < n; ++k) {
    auto xk = path.coords(k);
    for (std::size_t m = 0; m < k; ++m) {
      auto xm = path.coords(m);
      if (std::equal(xk.begin(), xk.end(), xm.begin())) {
        for (std::size_t j = m; j < k; ++j) ok[j] = 0;
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j)
    if (ok[j]) out.push_back(j);
  return out;
}

TEST(Regenerations, MonotonePathEveryTime) {
  auto path = straight(2, 50);
  auto rec = regenerations(path, kE1, 0.0);
  // The endpoint has no observed future, so it stays unresolved.
  ASSERT_EQ(rec.times.size(), 50u);
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_EQ(rec.times[k], k);
    EXPECT_EQ(rec.levels[k], static_cast<double>(k));
  }
  EXPECT_EQ(rec.unresolved, (std::vector<std::size_t>{50}));
}

TEST(Regenerations, LookaheadLeavesTailUnresolved) {
  auto path = straight(2, 50);
  auto rec = regenerations(path, kE1, 10.0);
  EXPECT_EQ(rec.times.size(), 41u);
  EXPECT_EQ(rec.times.back(), 40u);
  EXPECT_EQ(rec.unresolved.size(), 10u);
  EXPECT_EQ(rec.unresolved.front(), 41u);
}

TEST(Regenerations, SingleBacktrack) {
  // 0, e1, 0, e1, 2e1, 3e1, ...
  std::vector<Direction> steps{{0, +1}, {0, -1}, {0, +1}};
  for (int k = 0; k < 20; ++k) steps.push_back({0, +1});
  auto rec = regenerations(from_steps(steps), kE1, 3.0);
  auto has = [&](std::size_t t) { return std::find(rec.times.begin(), rec.times.end(), t) != rec.times.end(); };
  EXPECT_FALSE(has(1));  // undercut at time 2
  EXPECT_FALSE(has(3));  // level 1 was already reached at time 1: not a new maximum
  EXPECT_TRUE(has(4));
  EXPECT_TRUE(has(5));
  EXPECT_TRUE(has(0));   // level 0 is revisited at time 2 but never undercut
}

TEST(Regenerations, NeverUndercutOnRandomPaths) {
  for (std::uint64_t r = 0; r < 5; ++r) {
    auto rng = make_stream(41, 0, r);
    auto path = simulate_level0(presets::figure2_p0(), 200000, rng);
    auto rec = regenerations(path, kE1, 20.0);
    ASSERT_GT(rec.times.size(), 1000u);
    // Suffix minima of X.e1 over the whole observed path.
    std::vector<std::int64_t> suffix_min(path.size());
    std::int64_t m = path.coord(path.size() - 1, 0);
    for (std::size_t k = path.size(); k-- > 0;) {
      m = std::min(m, path.coord(k, 0));
      suffix_min[k] = m;
    }
    for (std::size_t j = 0; j < rec.times.size(); ++j) {
      const std::size_t t = rec.times[j];
      EXPECT_EQ(suffix_min[t], path.coord(t, 0));
      if (j > 0) EXPECT_GT(rec.levels[j], rec.levels[j - 1]);
    }
  }
}

TEST(Regenerations, GapMeanStableAcrossIndependentRuns) {
  const double h = 40.0 / std::log(2.0);
  auto rng_a = make_stream(42, 0, 0);
  auto rng_b = make_stream(42, 0, 1);
  auto rec_a = regenerations(simulate_level0(presets::figure2_p0(), 1000000, rng_a), kE1, h);
  auto rec_b = regenerations(simulate_level0(presets::figure2_p0(), 4000000, rng_b), kE1, h);
  auto ga = gap_statistics(rec_a.levels);
  auto gb = gap_statistics(rec_b.levels);
  ASSERT_GT(ga.blocks, 1000u);
  EXPECT_LE(std::abs(ga.mean / gb.mean - 1.0), 0.05) << ga.mean << " vs " << gb.mean;
  EXPECT_LE(std::abs(ga.lag1_autocorrelation), 4.0 / std::sqrt(static_cast<double>(ga.blocks)));
  EXPECT_LE(std::abs(gb.lag1_autocorrelation), 4.0 / std::sqrt(static_cast<double>(gb.blocks)));
}

TEST(GapStatistics, HandValues) {
  const std::vector<double> levels{0, 1, 3, 4, 6};
  auto g = gap_statistics(levels);
  EXPECT_EQ(g.blocks, 4u);
  EXPECT_DOUBLE_EQ(g.mean, 1.5);
  EXPECT_DOUBLE_EQ(g.variance, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(g.first_half_mean, 1.5);
  EXPECT_DOUBLE_EQ(g.second_half_mean, 1.5);
  EXPECT_NEAR(g.lag1_autocorrelation, -0.75, 1e-12);
}

TEST(UberLevels, SingleLevel) {
  auto rng = make_stream(43, 0, 0);
  auto path = simulate_level0(presets::figure2_p0(), 50000, rng);
  auto rec = regenerations(path, kE1, 20.0);
  std::vector<RegenerationRecord> recs{rec};
  std::vector<WalkPath> paths{path};
  auto u = uber_levels(recs, paths);
  std::vector<std::int64_t> expected;
  for (double l : rec.levels)
    if (l > 0) expected.push_back(static_cast<std::int64_t>(l));
  EXPECT_EQ(u.levels, expected);
  for (std::size_t k = 0; k < u.levels.size(); ++k) {
    EXPECT_EQ(path.coord(u.times[k], 0), u.levels[k]);
    EXPECT_EQ(u.points[k], path.point(u.times[k]));
  }
}

TEST(UberLevels, RetracingChildMatchesParent) {
  auto rng = make_stream(44, 0, 0);
  auto path = simulate_level0(presets::figure2_p0(), 50000, rng);
  auto rec = regenerations(path, kE1, 20.0);
  std::vector<RegenerationRecord> recs{rec, rec};
  std::vector<WalkPath> paths{path, path};
  std::vector<RegenerationRecord> one{rec};
  std::vector<WalkPath> one_path{path};
  EXPECT_EQ(uber_levels(recs, paths).levels, uber_levels(one, one_path).levels);
}

TEST(UberLevels, NestedRunInclusionAndStability) {
  SimulationConfig cfg;
  cfg.biases = {presets::figure2_p0(), presets::figure2_p1(1.5)};
  cfg.step_targets = {1000000, 1000000};
  cfg.master_seed = 45;
  auto run = nested_simulate(cfg);
  ASSERT_EQ(run.status, RunStatus::kComplete) << run.message;
  std::vector<RegenerationRecord> recs;
  std::vector<WalkPath> paths;
  for (const auto& lv : run.levels) {
    recs.push_back(lv.regenerations);
    paths.push_back(lv.path);
  }
  auto u = uber_levels(recs, paths);
  ASSERT_GT(u.levels.size(), 200u);
  for (const auto& rec : recs) {
    for (auto l : u.levels) {
      EXPECT_TRUE(std::binary_search(rec.levels.begin(), rec.levels.end(), static_cast<double>(l)));
    }
  }
  std::vector<double> lv(u.levels.begin(), u.levels.end());
  auto g = gap_statistics(lv);
  ASSERT_TRUE(std::isfinite(g.mean));
  const double se = std::sqrt(g.variance / (g.blocks / 2.0));
  EXPECT_LE(std::abs(g.first_half_mean - g.second_half_mean), 4.0 * std::sqrt(2.0) * se)
      << g.first_half_mean << " vs " << g.second_half_mean;
}

TEST(UberLevels, RejectsNonAxisRecords) {
  auto path = straight(2, 10);
  auto rec = regenerations(path, std::vector<double>{0.6, 0.8}, 0.0);
  std::vector<RegenerationRecord> recs{rec};
  std::vector<WalkPath> paths{path};
  EXPECT_EQ(code_of([&] { uber_levels(recs, paths); }), ErrorCode::kDomainError);
}

TEST(CutPoints, StraightPath) {
  auto cp = cut_points(straight(3, 40));
  ASSERT_EQ(cp.size(), 41u);
  for (std::size_t k = 0; k <= 40; ++k) EXPECT_EQ(cp[k], k);
}

TEST(CutPoints, HandCase) {
  // 0, e1, e1+e2, e1, 2e1
  auto path = WalkPath::from_points(std::vector<LatticePoint>{{0, 0}, {1, 0}, {1, 1}, {1, 0}, {2, 0}});
  auto cp = cut_points(path);
  EXPECT_EQ(cp, (std::vector<std::size_t>{0, 3, 4}));
  EXPECT_EQ(cp, brute_force_cut_points(path));
}

TEST(CutPoints, MatchesBruteForceOnRandomPaths) {
  std::vector<BiasDistribution> laws{presets::figure2_p0(), presets::figure2_p1(2.4), presets::half_drift_p0(),
                                     BiasDistribution::symmetric(2), presets::canonical(3, 1, 1.5)};
  int compared = 0;
  for (std::size_t li = 0; li < laws.size(); ++li) {
    for (std::uint64_t r = 0; r < 4; ++r) {
      const std::size_t n = r == 0 ? 10000 : 500 * (r + 1);
      auto rng = make_stream(46, li, r);
      auto path = simulate_level0(laws[li], n, rng);
      EXPECT_EQ(cut_points(path), brute_force_cut_points(path)) << "law " << li << " replica " << r;
      ++compared;
    }
  }
  EXPECT_EQ(compared, 20);
}

TEST(CutPoints, SettledFilter) {
  auto rng = make_stream(47, 0, 0);
  auto path = simulate_level0(presets::figure2_p0(), 5000, rng);
  auto all = cut_points(path);
  auto settled = cut_points(path, 50.0);
  std::int64_t past_max = path.coord(0, 0);
  std::size_t k = 0;
  std::vector<std::size_t> expected;
  for (std::size_t n = 0; n < path.size(); ++n) {
    past_max = std::max(past_max, path.coord(n, 0));
    while (k < all.size() && all[k] < n) ++k;
    if (k < all.size() && all[k] == n && static_cast<double>(past_max) < 50.0) expected.push_back(n);
  }
  EXPECT_EQ(settled, expected);
  EXPECT_FALSE(settled.empty());
  EXPECT_LT(settled.size(), all.size());
}

TEST(Traps, MonotonePathHasNone) {
  auto path = straight(2, 100);
  auto rec = regenerations(path, kE1, 5.0);
  for (std::int64_t h = 1; h <= 5; ++h) EXPECT_TRUE(trap_events(path, rec, kE1, h).traps.empty());
}

TEST(Traps, HandBuiltDepthOnePointThree) {
  const double a = 0.65;
  const std::vector<double> ell{a, std::sqrt(1.0 - a * a)};
  std::vector<Direction> steps{{1, +1}, {1, +1}, {0, -1}, {0, -1}};
  for (int k = 0; k < 30; ++k) steps.push_back({1, +1});
  auto path = from_steps(steps);
  EXPECT_NEAR(path.projection(2, ell) - path.projection(4, ell), 1.3, 1e-12);
  auto rec = regenerations(path, ell, 2.0);
  ASSERT_GE(rec.times.size(), 2u);
  EXPECT_EQ(rec.times[0], 0u);
  EXPECT_EQ(rec.times[1], 6u);
  auto one = trap_events(path, rec, ell, 1);
  ASSERT_EQ(one.traps.size(), 1u);
  EXPECT_EQ(one.traps[0].block, 0u);
  EXPECT_EQ(one.traps[0].m, 2u);
  EXPECT_EQ(one.traps[0].n, 4u);
  EXPECT_TRUE(trap_events(path, rec, ell, 2).traps.empty());
  EXPECT_TRUE(trap_events(path, rec, ell, 3).traps.empty());
  auto profile = trap_profile(path, rec, ell);
  EXPECT_TRUE(profile.occurs(0, 1));
  EXPECT_FALSE(profile.occurs(1, 1));
}

TEST(Traps, HeightRounding) {
  EXPECT_EQ(trap_height(100, 0.5, std::log(2.0)), 3);
  EXPECT_EQ(trap_height(100, 0.999, std::log(2.0)), 1);
  EXPECT_EQ(trap_height(2, 0.5, 5.0), 1);
  EXPECT_EQ(trap_height(1 << 20, 0.05, std::log(2.0)), 19);
}

std::vector<TrapProfile> ensemble(double r, std::size_t replicas, std::size_t steps, std::uint64_t seed) {
  (void)r;
  std::vector<TrapProfile> out;
  const double h = 40.0 / std::log(2.0);
  for (std::uint64_t k = 0; k < replicas; ++k) {
    auto rng = make_stream(seed, 0, k);
    auto path = simulate_level0(presets::figure2_p0(), steps, rng);
    auto rec = regenerations(path, kE1, h);
    out.push_back(trap_profile(path, rec, kE1));
  }
  return out;
}

TEST(TrapScaling, TrapFreeEnsembleCountsZero) {
  std::vector<TrapProfile> profiles;
  for (int k = 0; k < 5; ++k) {
    auto path = straight(2, 300);
    profiles.push_back(trap_profile(path, regenerations(path, kE1, 1.0), kE1));
  }
  auto s = trap_scaling(profiles, 100, 0.5, std::log(2.0));
  EXPECT_EQ(s.counts, (std::vector<std::uint64_t>(5, 0)));
  EXPECT_EQ(s.fraction_exceeding, 0.0);
  EXPECT_EQ(s.rejected, 0u);
}

TEST(TrapScaling, EpsilonNearOneRoundsHeightToOne) {
  auto profiles = ensemble(2.4, 3, 20000, 48);
  auto s = trap_scaling(profiles, 1000, 0.999, std::log(2.0));
  EXPECT_EQ(s.height, 1);
  EXPECT_LT(s.height_real, 1.0);
  for (auto c : s.counts) EXPECT_GT(c, static_cast<std::uint64_t>(s.threshold));
  EXPECT_EQ(s.fraction_exceeding, 1.0);
}

TEST(TrapScaling, InsufficientBlocks) {
  std::vector<TrapProfile> profiles;
  auto path = straight(2, 20);
  profiles.push_back(trap_profile(path, regenerations(path, kE1, 1.0), kE1));
  EXPECT_EQ(code_of([&] { trap_scaling(profiles, 100, 0.5, std::log(2.0)); }), ErrorCode::kInsufficientBlocks);
}

// n = 100, eps = 0.5 at r = 2.4 over 100 replicas: the fraction of replicas
// with N >= n^{1/4} is required to exceed 0.9.
TEST(TrapScaling, SubBallisticSmallScale) {
  auto profiles = ensemble(2.4, 100, 4000, 49);
  auto s = trap_scaling(profiles, 100, 0.5, std::log(2.0));
  EXPECT_EQ(s.height, 3);
  EXPECT_EQ(s.rejected, 0u);
  EXPECT_GT(s.fraction_exceeding, 0.9) << "threshold " << s.threshold;
}

}  // namespace
}  // namespace rwtrace
