#include "rwtrace/oracle_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "rwtrace/errors.hpp"
#include "rwtrace/presets.hpp"
#include "rwtrace/rng.hpp"
#include "rwtrace/walk_engine.hpp"

namespace rwtrace {

namespace {

// Fixture shapes are fixed; only Monte Carlo draws depend on the user seed.
constexpr std::uint64_t kFixtureSeed = 0x0AC1E5EEDULL;
// Relative round-off allowance for comparing two separate solves.
constexpr double kRayleighTolerance = 1e-10;

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(12);
  o << v;
  return o.str();
}

std::size_t pick(CounterRng& rng, std::size_t n) { return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)); }

double relative_error(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// Random series-parallel network between terminals 0 and 1, with its
// resistance from the composition rules.
struct SpBuilder {
  std::vector<FiniteNetwork::Edge> edges;
  std::size_t next_vertex = 2;
  CounterRng rng;

  double build(std::size_t a, std::size_t b, int depth) {
    const double u = rng.uniform();
    if (depth == 0 || u < 0.3) {
      const double c = std::exp(4.0 * rng.uniform() - 2.0);
      edges.push_back({a, b, std::log(c)});
      return 1.0 / c;
    }
    if (u < 0.65) {
      const std::size_t mid = next_vertex++;
      return build(a, mid, depth - 1) + build(mid, b, depth - 1);
    }
    const double r1 = build(a, b, depth - 1);
    const double r2 = build(a, b, depth - 1);
    return r1 * r2 / (r1 + r2);
  }
};

void add(OracleReport& rep, std::string name, bool ok, std::string detail) {
  rep.checks.push_back(OracleCheck{std::move(name), ok, std::move(detail)});
}

void check_hit_before(OracleReport& rep, const OracleSuiteOptions& opt) {
  const BiasDistribution p0 = presets::figure2_p0();
  const BiasDistribution p1 = presets::figure2_p1(1.5);
  const ConductanceParams params(p1);
  CounterRng layout(derive_stream_key(kFixtureSeed, 1, 0));
  for (std::size_t f = 0; f < opt.fixtures; ++f) {
    TraceGraph g = random_trace_fixture(p0, opt.vertices, derive_stream_key(kFixtureSeed, 0, f));
    const FiniteNetwork net = FiniteNetwork::from_trace(g, params);
    const std::size_t n = net.vertex_count();
    // Draw (start, target, avoid) until the answer is not a trivial 0 or 1.
    std::size_t start = 0, target = 0, avoid = 0;
    double exact = 0.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      start = pick(layout, n);
      target = pick(layout, n - 1);
      if (target >= start) ++target;
      avoid = start;
      while (avoid == start || avoid == target) avoid = pick(layout, n);
      const std::size_t avoid_set[] = {avoid};
      exact = hit_before(net, start, target, avoid_set);
      if (exact > 0.01 && exact < 0.99) break;
    }

    // Independent estimate: simulate the restricted p1-kernel on the trace.
    g.certify_settled(std::numeric_limits<double>::infinity());
    CounterRng rng = make_stream(opt.seed, 100, f);
    const LatticePoint s = net.point(start), t = net.point(target), a = net.point(avoid);
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < opt.trials; ++k) {
      LatticePoint x = s;
      while (!(x == t) && !(x == a)) x = step(p1, &g, x, rng);
      hits += (x == t) ? 1 : 0;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(opt.trials);
    const double sigma = std::sqrt(exact * (1.0 - exact) / static_cast<double>(opt.trials));
    const bool ok = std::abs(freq - exact) <= 3.0 * sigma + 1e-12;
    add(rep, "hit_before vs Monte Carlo (fixture " + std::to_string(f) + ")", ok,
        "exact=" + fmt(exact) + " mc=" + fmt(freq) + " sigma=" + fmt(sigma) + " vertices=" + std::to_string(n));
  }
}

void check_laws(OracleReport& rep, const OracleSuiteOptions& opt) {
  CounterRng rng(derive_stream_key(kFixtureSeed, 2, 0));
  for (int f = 0; f < 10; ++f) {
    // Series: path 0 - 2 - 3 - ... - 1.
    const int k = 2 + static_cast<int>(pick(rng, 6));
    std::vector<FiniteNetwork::Edge> edges;
    double want = 0.0;
    std::size_t prev = 0;
    for (int j = 0; j < k; ++j) {
      const double c = std::exp(6.0 * rng.uniform() - 3.0);
      want += 1.0 / c;
      const std::size_t next = j + 1 == k ? 1 : static_cast<std::size_t>(j + 2);
      const double logc = (opt.perturb && f == 0 && j == 0) ? std::log(c * (1.0 + 1e-6)) : std::log(c);
      edges.push_back({prev, next, logc});
      prev = next;
    }
    const FiniteNetwork net = FiniteNetwork::from_edges(static_cast<std::size_t>(k + 1), edges);
    const std::size_t b[] = {1};
    const double got = effective_resistance(net, 0, b);
    const double err = relative_error(got, want);
    add(rep, "series law (fixture " + std::to_string(f) + ")", err <= 1e-12, "relative error " + fmt(err));
  }
  for (int f = 0; f < 10; ++f) {
    const int k = 2 + static_cast<int>(pick(rng, 6));
    std::vector<FiniteNetwork::Edge> edges;
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      const double c = std::exp(6.0 * rng.uniform() - 3.0);
      total += c;
      edges.push_back({0, 1, std::log(c)});
    }
    const FiniteNetwork net = FiniteNetwork::from_edges(2, edges);
    const std::size_t b[] = {1};
    const double err = relative_error(effective_resistance(net, 0, b), 1.0 / total);
    add(rep, "parallel law (fixture " + std::to_string(f) + ")", err <= 1e-12, "relative error " + fmt(err));
  }
  for (int f = 0; f < 10; ++f) {
    SpBuilder sp{{}, 2, CounterRng(derive_stream_key(kFixtureSeed, 3, static_cast<std::uint64_t>(f)))};
    const double want = sp.build(0, 1, 5);
    const FiniteNetwork net = FiniteNetwork::from_edges(sp.next_vertex, sp.edges);
    const std::size_t b[] = {1};
    const double err = relative_error(effective_resistance(net, 0, b), want);
    add(rep, "series-parallel composition (fixture " + std::to_string(f) + ")", err <= 1e-12,
        "relative error " + fmt(err) + " edges=" + std::to_string(sp.edges.size()));
  }
  {
    const std::vector<FiniteNetwork::Edge> square{{0, 1, 0.0}, {1, 2, 0.0}, {2, 3, 0.0}, {3, 0, 0.0}};
    const FiniteNetwork net = FiniteNetwork::from_edges(4, square);
    const std::size_t b[] = {2};
    const double got = effective_resistance(net, 0, b);
    add(rep, "unit square opposite corners", std::abs(got - 1.0) <= 1e-12, "R=" + fmt(got));
  }
  {
    // Balanced Wheatstone bridge: the bridge edge carries no current.
    const std::vector<FiniteNetwork::Edge> bridge{{0, 2, std::log(1.0)}, {0, 3, std::log(2.0)}, {2, 1, std::log(3.0)},
                                                  {3, 1, std::log(6.0)}, {2, 3, std::log(5.0)}};
    const FiniteNetwork net = FiniteNetwork::from_edges(4, bridge);
    const std::size_t b[] = {1};
    const double want = 1.0 / (1.0 / (1.0 + 1.0 / 3.0) + 1.0 / (0.5 + 1.0 / 6.0));
    const double err = relative_error(effective_resistance(net, 0, b), want);
    add(rep, "balanced Wheatstone bridge", err <= 1e-12, "relative error " + fmt(err));
  }
}

void check_rayleigh_and_metric(OracleReport& rep, const OracleSuiteOptions& opt) {
  const BiasDistribution p0 = presets::figure2_p0();
  const ConductanceParams params(presets::figure2_p1(1.5));
  CounterRng rng(derive_stream_key(kFixtureSeed, 4, 0));
  std::size_t violations = 0;
  std::size_t done = 0;
  double worst = 0.0;
  for (std::size_t f = 0; done < opt.deletions; ++f) {
    const TraceGraph g = random_trace_fixture(p0, 50, derive_stream_key(kFixtureSeed, 5, f));
    const FiniteNetwork net = FiniteNetwork::from_trace(g, params);
    const std::size_t n = net.vertex_count();
    for (int q = 0; q < 10 && done < opt.deletions; ++q, ++done) {
      const std::size_t a = pick(rng, n);
      std::size_t b = pick(rng, n - 1);
      if (b >= a) ++b;
      const std::size_t bs[] = {b};
      const double before = effective_resistance(net, a, bs);
      const FiniteNetwork cut = net.without_edge(pick(rng, net.edge_count()));
      double after = std::numeric_limits<double>::infinity();
      try {
        after = effective_resistance(cut, a, bs);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSingularSystem) throw;
      }
      const double drop = (before - after) / before;
      worst = std::max(worst, drop);
      if (drop > kRayleighTolerance) ++violations;
    }
  }
  add(rep, "Rayleigh monotonicity under edge deletion", violations == 0,
      std::to_string(done) + " deletions, " + std::to_string(violations) + " violations, worst relative drop " + fmt(worst));

  const TraceGraph g = random_trace_fixture(p0, 40, derive_stream_key(kFixtureSeed, 6, 0));
  const FiniteNetwork net = FiniteNetwork::from_trace(g, params);
  std::size_t bad = 0;
  for (int q = 0; q < 200; ++q) {
    std::size_t v[3];
    for (auto& x : v) x = pick(rng, net.vertex_count());
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) continue;
    auto r = [&](std::size_t x, std::size_t y) {
      const std::size_t ys[] = {y};
      return effective_resistance(net, x, ys);
    };
    const double ac = r(v[0], v[2]);
    if (ac > (r(v[0], v[1]) + r(v[1], v[2])) * (1.0 + 1e-10)) ++bad;
  }
  add(rep, "effective resistance triangle inequality", bad == 0, std::to_string(bad) + " violations in 200 triples");
}

void check_never_return(OracleReport& rep) {
  for (double r : {1.5, 4.0, 50.0}) {
    const BiasDistribution p = presets::figure2_p1(r);
    const ConductanceParams params(p);
    const double beta = params.beta();
    const double exact = (beta - 1.0) / (beta + 1.0);
    double last_width = std::numeric_limits<double>::infinity();
    bool contains = true, shrinking = true;
    std::string detail;
    for (int radius : {10, 20, 40}) {
      // Straight segment from -5 e1 to radius e1; x = origin.
      WalkPath path(2);
      for (int k = 0; k < 5; ++k) path.push_step(Direction{0, -1});
      for (int k = 0; k < 5 + radius; ++k) path.push_step(Direction{0, 1});
      const TraceGraph g = TraceGraph::from_path(path);
      const FiniteNetwork net = FiniteNetwork::from_trace(g, params);
      const std::size_t x = net.index_of(LatticePoint{0, 0});
      const LatticePoint far{radius, 0};
      const std::size_t f = net.index_of(far);
      const std::size_t fs[] = {f};
      const NeverReturnBracket br = never_return_probability(net, x, fs, f, straight_tail_resistance(params, far));
      const double width = br.upper - br.lower;
      contains = contains && br.lower <= exact * (1.0 + 1e-12) && exact <= br.upper * (1.0 + 1e-12);
      shrinking = shrinking && width < last_width;
      last_width = width;
      detail += "R" + std::to_string(radius) + ":[" + fmt(br.lower) + "," + fmt(br.upper) + "] ";
    }
    add(rep, "never-return bracket contains birth-death value (r=" + fmt(r) + ")", contains,
        detail + "exact=" + fmt(exact));
    add(rep, "never-return bracket shrinks with radius (r=" + fmt(r) + ")", shrinking || last_width == 0.0, detail);
  }
  {
    const std::vector<FiniteNetwork::Edge> one{{0, 1, std::log(3.0)}};
    const FiniteNetwork net = FiniteNetwork::from_edges(2, one);
    const std::size_t fs[] = {1};
    const NeverReturnBracket br = never_return_probability(net, 0, fs, 1, 0.0);
    add(rep, "never-return bracket, single edge to shorted boundary",
        std::abs(br.lower - 1.0) <= 1e-12 && std::abs(br.upper - 1.0) <= 1e-12,
        "[" + fmt(br.lower) + "," + fmt(br.upper) + "]");
  }
}

void check_kernel(OracleReport& rep, const OracleSuiteOptions& opt) {
  const BiasDistribution p0 = presets::figure2_p0();
  CounterRng rng = make_stream(opt.seed, 200, 0);
  const WalkPath path0 = simulate_level0(p0, opt.kernel_steps, rng);
  std::size_t cells = 0;
  for (const KernelCell& c : kernel_goodness_of_fit(p0, nullptr, path0)) {
    ++cells;
    rep.flagged_kernel_cells += c.flagged ? 1 : 0;
  }
  SimulationConfig cfg;
  cfg.dimension = 2;
  cfg.biases = {p0, presets::figure2_p1(1.5)};
  cfg.step_targets = {0, opt.kernel_steps};
  cfg.master_seed = opt.seed;
  cfg.replica = 201;
  const NestedRun run = nested_simulate(cfg);
  for (const KernelCell& c : kernel_goodness_of_fit(cfg.biases[1], &run.levels[0].trace, run.levels[1].path)) {
    ++cells;
    rep.flagged_kernel_cells += c.flagged ? 1 : 0;
  }
  add(rep, "kernel goodness of fit", true,
      std::to_string(cells) + " cells tested, " + std::to_string(rep.flagged_kernel_cells) + " flagged at p < 1e-4");
  add(rep, "frontier audit", run.frontier_violations == 0 && run.status == RunStatus::kComplete,
      std::to_string(run.frontier_violations) + " unsettled consultations, status " + to_string(run.status));
  add(rep, "nesting inclusion", run.levels[1].trace.is_subgraph_of(run.levels[0].trace), "level-1 trace within level-0 trace");
}

}  // namespace

TraceGraph random_trace_fixture(const BiasDistribution& p, std::size_t max_vertices, std::uint64_t key,
                                std::size_t max_steps) {
  TraceGraph g(p.dimension());
  CounterRng rng(key);
  LatticePoint x(p.dimension());
  for (std::size_t n = 0; n < max_steps && g.vertex_count() < max_vertices; ++n) {
    const LatticePoint y = step(p, nullptr, x, rng);
    Direction dir;
    adjacent_direction(x, y, &dir);
    g.append_step(dir);
    x = y;
  }
  return g;
}

bool OracleReport::passed() const { return failures() == 0; }

std::size_t OracleReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const OracleCheck& c) { return !c.passed; }));
}

OracleReport run_oracle_suite(const OracleSuiteOptions& options) {
  if (options.vertices < 3 || options.vertices > 50) throw Error(ErrorCode::kDomainError, "fixture size must be in [3, 50]");
  OracleReport rep;
  check_laws(rep, options);
  check_hit_before(rep, options);
  check_rayleigh_and_metric(rep, options);
  check_never_return(rep);
  check_kernel(rep, options);
  return rep;
}

}  // namespace rwtrace
