#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "rwtrace/errors.hpp"
#include "rwtrace/presets.hpp"
#include "rwtrace/regeneration.hpp"
#include "rwtrace/rng.hpp"
#include "rwtrace/trace_graph.hpp"
#include "rwtrace/walk_engine.hpp"

namespace rwtrace {
namespace {

using Points = std::vector<LatticePoint>;

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

TraceGraph graph_of(const Points& pts) { return TraceGraph::from_path(WalkPath::from_points(pts)); }

TEST(WalkPath, RejectsBadPaths) {
  EXPECT_EQ(code_of([] { WalkPath::from_points(Points{{0, 0}, {1, 1}}); }), ErrorCode::kNonAdjacentStep);
  EXPECT_EQ(code_of([] { WalkPath::from_points(Points{{1, 0}, {2, 0}}); }), ErrorCode::kNonAdjacentStep);
}

TEST(TraceGraph, StraightPath) {
  auto g = graph_of({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_EQ(g.vertex_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.neighbors({0, 0}).size(), 1u);
  EXPECT_EQ(g.neighbors({2, 0}).size(), 1u);
  EXPECT_EQ(g.neighbors({1, 0}).size(), 2u);
}

TEST(TraceGraph, RepeatedEdgeDeduplicated) {
  auto g = graph_of({{0, 0}, {1, 0}, {0, 0}, {0, 1}});
  EXPECT_EQ(g.vertex_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(TraceGraph, OrthogonalCrossing) {
  // Six steps crossing at (1, 0): along e_1 then up, back down through it.
  auto g = graph_of({{0, 0}, {1, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 0}, {1, -1}});
  auto nb = g.neighbors({1, 0});
  ASSERT_EQ(nb.size(), 4u);
  EXPECT_EQ(nb[0], (LatticePoint{2, 0}));
  EXPECT_EQ(nb[1], (LatticePoint{0, 0}));
  EXPECT_EQ(nb[2], (LatticePoint{1, 1}));
  EXPECT_EQ(nb[3], (LatticePoint{1, -1}));
  EXPECT_EQ(g.degree({1, 0}), 4);
  EXPECT_EQ(g.vertex_count(), 6u);
  EXPECT_EQ(g.edge_count(), 6u);
}

TEST(TraceGraph, NeighborsOfAbsentVertex) {
  auto g = graph_of({{0, 0}, {1, 0}});
  EXPECT_EQ(code_of([&] { g.neighbors({5, 5}); }), ErrorCode::kVertexAbsent);
}

TEST(TraceGraph, RandomWalkRevisits) {
  auto rng = make_stream(11, 0, 0);
  auto path = simulate_level0(presets::figure2_p0(), 10000, rng);
  auto g = TraceGraph::from_path(path);
  EXPECT_LT(g.vertex_count(), 10001u);
  std::set<std::vector<std::int64_t>> distinct;
  for (std::size_t n = 0; n < path.size(); ++n) {
    auto c = path.coords(n);
    distinct.insert({c.begin(), c.end()});
  }
  EXPECT_EQ(g.vertex_count(), distinct.size());
}

TEST(TraceGraph, EdgesJoinPresentNeighbours) {
  auto rng = make_stream(12, 0, 0);
  auto g = TraceGraph::from_path(simulate_level0(presets::canonical(3, 1, 2.0), 20000, rng));
  std::size_t half_edges = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    auto x = g.vertex(v);
    int deg = g.degree(x);
    EXPECT_GE(deg, 1);
    EXPECT_LE(deg, 6);
    for (const auto& y : g.neighbors(x)) {
      EXPECT_EQ((x - y).l1_norm(), 1);
      ASSERT_TRUE(g.contains(y));
      Direction dir;
      ASSERT_TRUE(adjacent_direction(y, x, &dir));
      EXPECT_TRUE(g.has_edge(y, dir));
    }
    half_edges += static_cast<std::size_t>(deg);
  }
  EXPECT_EQ(half_edges, 2 * g.edge_count());
}

TEST(TraceGraph, ExtendEmptyIsIdentity) {
  auto g = graph_of({{0, 0}, {1, 0}, {1, 1}});
  auto h = g;
  h.extend(Points{});
  EXPECT_EQ(g, h);
}

TEST(TraceGraph, ExtendMatchesConcatenation) {
  auto g = graph_of({{0, 0}, {1, 0}, {1, 1}});
  g.extend(Points{{1, 1}, {0, 1}, {0, 0}, {-1, 0}});
  auto h = graph_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}, {-1, 0}});
  EXPECT_EQ(g, h);
}

TEST(TraceGraph, ExtendMustStartAtTip) {
  auto g = graph_of({{0, 0}, {1, 0}});
  EXPECT_EQ(code_of([&] { g.extend(Points{{0, 0}, {0, 1}}); }), ErrorCode::kDiscontinuousExtension);
}

TEST(TraceGraph, IncrementalEqualsBulk) {
  auto rng = make_stream(13, 0, 0);
  auto path = simulate_level0(presets::figure2_p0(), 10000, rng);
  auto bulk = TraceGraph::from_path(path);
  TraceGraph inc(2);
  for (std::size_t k = 0; k < 10; ++k) {
    Points seg;
    for (std::size_t n = k * 1000; n <= (k + 1) * 1000; ++n) seg.push_back(path.point(n));
    inc.extend(seg);
  }
  EXPECT_EQ(inc, bulk);
  EXPECT_TRUE(inc.is_subgraph_of(bulk));
  EXPECT_TRUE(bulk.is_subgraph_of(inc));
}

TEST(TraceGraph, CertifySettledMonotone) {
  TraceGraph g(2);
  g.certify_settled(-std::numeric_limits<double>::infinity());
  EXPECT_EQ(g.settled_level(), -std::numeric_limits<double>::infinity());
  g.certify_settled(5);
  g.certify_settled(3);
  EXPECT_EQ(g.settled_level(), 5.0);
  EXPECT_TRUE(g.is_settled({4, 100}));
  EXPECT_FALSE(g.is_settled({5, 0}));
}

TEST(TraceGraph, SettledRegionDoesNotGrow) {
  // Certify at a lookahead-certified regeneration level, then continue the
  // same walk 10^6 steps: nothing new may appear below the level.
  auto p0 = presets::figure2_p0();
  auto rng = make_stream(14, 0, 0);
  auto path = simulate_level0(p0, 20000, rng);
  const std::vector<double> e1{1.0, 0.0};
  auto rec = regenerations(path, e1, 40.0 / std::log(2.0));
  ASSERT_FALSE(rec.times.empty());
  auto g = TraceGraph::from_path(path);
  const double level = rec.levels.back();
  g.certify_settled(level);
  const std::size_t before = g.vertex_count();
  std::size_t below_before = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v) below_before += g.vertex_coord(v, 0) < level;
  LatticePoint x = path.back();
  for (int n = 0; n < 1000000; ++n) {
    x = step(p0, nullptr, x, rng);
    g.append_step([&] {
      Direction dir;
      adjacent_direction(g.tip(), x, &dir);
      return dir;
    }());
  }
  std::size_t below_after = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v) below_after += g.vertex_coord(v, 0) < level;
  EXPECT_GT(g.vertex_count(), before);
  EXPECT_EQ(below_after, below_before);
}

TEST(TraceGraph, DeterministicReconstruction) {
  auto a = make_stream(15, 0, 0), b = make_stream(15, 0, 0);
  auto ga = TraceGraph::from_path(simulate_level0(presets::figure2_p0(), 50000, a));
  auto gb = TraceGraph::from_path(simulate_level0(presets::figure2_p0(), 50000, b));
  EXPECT_EQ(ga, gb);
}

TEST(TraceGraph, BinaryRoundTrip) {
  auto rng = make_stream(16, 0, 0);
  auto g = TraceGraph::from_path(simulate_level0(presets::canonical(3, 2, 1.5), 5000, rng));
  g.certify_settled(7.0);
  std::stringstream buf;
  g.save(buf);
  auto h = TraceGraph::load(buf);
  EXPECT_EQ(g, h);
  EXPECT_EQ(h.settled_level(), 7.0);
  EXPECT_EQ(h.tip(), g.tip());
  std::stringstream junk("not a trace");
  EXPECT_EQ(code_of([&] { TraceGraph::load(junk); }), ErrorCode::kIoError);
}

TEST(TraceGraph, SubgraphDetectsMissingEdge) {
  auto big = graph_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  auto small = graph_of({{0, 0}, {1, 0}, {1, 1}});
  auto other = graph_of({{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}});
  EXPECT_TRUE(small.is_subgraph_of(big));
  EXPECT_FALSE(big.is_subgraph_of(small));
  EXPECT_FALSE(other.is_subgraph_of(big));
}

}  // namespace
}  // namespace rwtrace
