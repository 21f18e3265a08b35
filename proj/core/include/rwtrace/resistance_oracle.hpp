#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "rwtrace/bias_model.hpp"
#include "rwtrace/lattice.hpp"
#include "rwtrace/rng.hpp"
#include "rwtrace/trace_graph.hpp"

namespace rwtrace {

// A finite electrical network. Conductances are held in log space and
// rescaled by their maximum, so exp(log_scale()) times a stored value is the
// true conductance. Resistances returned by the solvers are true values.
class FiniteNetwork {
 public:
  struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    double log_conductance = 0.0;
  };

  // Explicit network on vertices 0..n-1 (no lattice positions).
  static FiniteNetwork from_edges(std::size_t n_vertices, std::span<const Edge> edges);
  // All vertices and edges of g with the conductances of params.
  static FiniteNetwork from_trace(const TraceGraph& g, const ConductanceParams& params);
  // The subgraph of g induced by the vertices accepted by keep.
  static FiniteNetwork from_trace(const TraceGraph& g, const ConductanceParams& params,
                                  const std::function<bool(const LatticePoint&)>& keep);

  std::size_t vertex_count() const { return offsets_.size() - 1; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  double log_scale() const { return log_scale_; }

  // Scaled conductance of edge k, in (0, 1].
  double scaled_conductance(std::size_t k) const { return scaled_[k]; }
  double conductance(std::size_t k) const;
  // c(x): total conductance at vertex v (true value).
  double vertex_conductance(std::size_t v) const;

  bool has_positions() const { return !points_.empty(); }
  const LatticePoint& point(std::size_t v) const { return points_.at(v); }
  // Index of x; throws VertexAbsent.
  std::size_t index_of(const LatticePoint& x) const;

  // Incident (neighbour, edge index) pairs of v.
  std::span<const std::pair<std::size_t, std::size_t>> incident(std::size_t v) const {
    return {incidence_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  // Copy with edge k removed.
  FiniteNetwork without_edge(std::size_t k) const;

 private:
  void build(std::size_t n_vertices);

  std::vector<Edge> edges_;
  std::vector<double> scaled_;
  double log_scale_ = 0.0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::pair<std::size_t, std::size_t>> incidence_;
  std::vector<LatticePoint> points_;
  std::map<std::vector<std::int64_t>, std::size_t> index_;
};

// Potentials of the harmonic function with the given fixed values. Entries
// for vertices not connected to any fixed vertex are NaN.
std::vector<double> harmonic_extension(const FiniteNetwork& net, std::span<const std::size_t> fixed,
                                       std::span<const double> values);

// R(a, B). Throws SingularSystem if a is not connected to B, DomainError if a
// is in B or B is empty.
double effective_resistance(const FiniteNetwork& net, std::size_t a, std::span<const std::size_t> b);

// Probability that the network walk from start hits target before any
// vertex of avoid. Throws DomainError if start is in {target} u avoid.
double hit_before(const FiniteNetwork& net, std::size_t start, std::size_t target, std::span<const std::size_t> avoid);

// 1 / (c(a) R(a, B)): probability of reaching B before returning to a.
double escape_probability(const FiniteNetwork& net, std::size_t a, std::span<const std::size_t> b);

struct NeverReturnBracket {
  double lower = 0.0;      // 1/(c(x) r_upper)
  double upper = 0.0;      // 1/(c(x) r_lower)
  double r_lower = 0.0;    // R(x, F) with the far boundary F shorted
  double r_upper = 0.0;    // R(x, f) + tail bound
};

// Bracket for the probability that the walk from x never returns to x on an
// infinite network whose finite piece is net. The far boundary F is shorted
// for the lower resistance; the upper resistance is R(x, exit) plus
// tail_resistance, a bound on the resistance from exit to infinity.
NeverReturnBracket never_return_probability(const FiniteNetwork& net, std::size_t x,
                                            std::span<const std::size_t> far_boundary, std::size_t exit,
                                            double tail_resistance);

// Resistance from `from` to infinity along the straight ray in direction +e_1
// for params; requires a positive first log-odds component.
double straight_tail_resistance(const ConductanceParams& params, const LatticePoint& from);

// Monte Carlo estimate of hit_before by simulating the network walk.
struct HitFrequency {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double frequency() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
};
HitFrequency simulate_hit_before(const FiniteNetwork& net, std::size_t start, std::size_t target,
                                 std::span<const std::size_t> avoid, std::uint64_t trials, CounterRng& rng);

// Fixture files: the trace binary format followed by a bias record
// ("RWBP", u32 dimension, 2d little-endian f64 weights).
void save_fixture(std::ostream& out, const TraceGraph& g, const BiasDistribution& p);
std::pair<TraceGraph, BiasDistribution> load_fixture(std::istream& in);

}  // namespace rwtrace
