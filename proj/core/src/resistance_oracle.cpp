#include "rwtrace/resistance_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "binary_io.hpp"
#include "rwtrace/errors.hpp"

namespace rwtrace {

namespace {

constexpr std::size_t kDirectSolveLimit = 10000;
constexpr double kSolverTolerance = 1e-12;
constexpr char kBiasMagic[4] = {'R', 'W', 'B', 'P'};

std::vector<std::int64_t> key_of(const LatticePoint& x) { return {x.coords().begin(), x.coords().end()}; }

}  // namespace

void FiniteNetwork::build(std::size_t n_vertices) {
  log_scale_ = -std::numeric_limits<double>::infinity();
  for (const Edge& e : edges_) {
    if (e.a >= n_vertices || e.b >= n_vertices) throw Error(ErrorCode::kDomainError, "edge endpoint out of range");
    if (e.a == e.b) throw Error(ErrorCode::kDomainError, "self-loops are not allowed");
    if (!std::isfinite(e.log_conductance)) throw Error(ErrorCode::kDomainError, "conductances must be positive and finite");
    log_scale_ = std::max(log_scale_, e.log_conductance);
  }
  if (edges_.empty()) log_scale_ = 0.0;
  scaled_.resize(edges_.size());
  for (std::size_t k = 0; k < edges_.size(); ++k) scaled_[k] = std::exp(edges_[k].log_conductance - log_scale_);
  offsets_.assign(n_vertices + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[e.a + 1];
    ++offsets_[e.b + 1];
  }
  for (std::size_t v = 0; v < n_vertices; ++v) offsets_[v + 1] += offsets_[v];
  incidence_.assign(2 * edges_.size(), {0, 0});
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    incidence_[fill[edges_[k].a]++] = {edges_[k].b, k};
    incidence_[fill[edges_[k].b]++] = {edges_[k].a, k};
  }
}

FiniteNetwork FiniteNetwork::from_edges(std::size_t n_vertices, std::span<const Edge> edges) {
  FiniteNetwork net;
  net.edges_.assign(edges.begin(), edges.end());
  net.build(n_vertices);
  return net;
}

FiniteNetwork FiniteNetwork::from_trace(const TraceGraph& g, const ConductanceParams& params) {
  return from_trace(g, params, [](const LatticePoint&) { return true; });
}

FiniteNetwork FiniteNetwork::from_trace(const TraceGraph& g, const ConductanceParams& params,
                                        const std::function<bool(const LatticePoint&)>& keep) {
  if (g.dimension() != params.dimension()) throw Error(ErrorCode::kDomainError, "dimension mismatch");
  FiniteNetwork net;
  std::vector<std::size_t> local(g.vertex_count(), std::numeric_limits<std::size_t>::max());
  for (VertexId id = 0; id < g.vertex_count(); ++id) {
    LatticePoint x = g.vertex(id);
    if (!keep(x)) continue;
    local[id] = net.points_.size();
    net.index_.emplace(key_of(x), net.points_.size());
    net.points_.push_back(x);
  }
  for (VertexId id = 0; id < g.vertex_count(); ++id) {
    if (local[id] == std::numeric_limits<std::size_t>::max()) continue;
    const LatticePoint& x = net.points_[local[id]];
    const std::uint32_t mask = g.adjacency(id);
    for (int k = 0; k < 2 * g.dimension(); k += 2) {  // positive directions only: each edge once
      if (!((mask >> k) & 1u)) continue;
      const LatticePoint y = x.shifted(Direction::from_index(k));
      const VertexId other = g.find(y);
      if (local[other] == std::numeric_limits<std::size_t>::max()) continue;
      net.edges_.push_back({local[id], local[other], params.log_conductance(x, y)});
    }
  }
  net.build(net.points_.size());
  return net;
}

double FiniteNetwork::conductance(std::size_t k) const { return std::exp(edges_.at(k).log_conductance); }

double FiniteNetwork::vertex_conductance(std::size_t v) const {
  double s = 0.0;
  for (const auto& [w, k] : incident(v)) s += scaled_[k];
  return s * std::exp(log_scale_);
}

std::size_t FiniteNetwork::index_of(const LatticePoint& x) const {
  auto it = index_.find(key_of(x));
  if (it == index_.end()) throw Error(ErrorCode::kVertexAbsent, x.to_string() + " is not in the network");
  return it->second;
}

FiniteNetwork FiniteNetwork::without_edge(std::size_t k) const {
  if (k >= edges_.size()) throw Error(ErrorCode::kDomainError, "edge index out of range");
  FiniteNetwork net = *this;
  net.edges_.erase(net.edges_.begin() + static_cast<std::ptrdiff_t>(k));
  net.build(vertex_count());
  return net;
}

std::vector<double> harmonic_extension(const FiniteNetwork& net, std::span<const std::size_t> fixed,
                                       std::span<const double> values) {
  const std::size_t n = net.vertex_count();
  if (fixed.size() != values.size()) throw Error(ErrorCode::kDomainError, "one value per fixed vertex required");
  std::vector<double> u(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> is_fixed(n, 0);
  std::vector<std::size_t> queue;
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    if (fixed[k] >= n) throw Error(ErrorCode::kDomainError, "fixed vertex out of range");
    u[fixed[k]] = values[k];
    if (!is_fixed[fixed[k]]) queue.push_back(fixed[k]);
    is_fixed[fixed[k]] = 1;
  }
  // Unknowns are the free vertices connected to some fixed vertex.
  std::vector<std::ptrdiff_t> unknown(n, -1);
  std::vector<std::size_t> free_vertices;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (const auto& [w, k] : net.incident(queue[head])) {
      if (is_fixed[w] || unknown[w] >= 0) continue;
      unknown[w] = static_cast<std::ptrdiff_t>(free_vertices.size());
      free_vertices.push_back(w);
      queue.push_back(w);
    }
  }
  const std::size_t m = free_vertices.size();
  if (m == 0) return u;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t v = free_vertices[r];
    double diag = 0.0;
    for (const auto& [w, k] : net.incident(v)) {
      const double c = net.scaled_conductance(k);
      diag += c;
      if (is_fixed[w]) {
        rhs[static_cast<Eigen::Index>(r)] += c * u[w];
      } else {
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(unknown[w]), -c);
      }
    }
    triplets.emplace_back(static_cast<int>(r), static_cast<int>(r), diag);
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd x;
  if (m <= kDirectSolveLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::kSingularSystem, "factorisation failed");
    x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::kSingularSystem, "solve failed");
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        solver;
    solver.setTolerance(kSolverTolerance);
    solver.setMaxIterations(static_cast<Eigen::Index>(std::max<std::size_t>(10 * m, 1000)));
    solver.compute(a);
    x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::kSingularSystem, "conjugate gradient did not converge");
  }
  for (std::size_t r = 0; r < m; ++r) {
    const double val = x[static_cast<Eigen::Index>(r)];
    if (!std::isfinite(val)) throw Error(ErrorCode::kSingularSystem, "non-finite potential");
    u[free_vertices[r]] = val;
  }
  return u;
}

double effective_resistance(const FiniteNetwork& net, std::size_t a, std::span<const std::size_t> b) {
  if (b.empty()) throw Error(ErrorCode::kDomainError, "empty target set");
  if (a >= net.vertex_count()) throw Error(ErrorCode::kDomainError, "vertex out of range");
  if (std::find(b.begin(), b.end(), a) != b.end()) throw Error(ErrorCode::kDomainError, "a must not lie in B");
  std::vector<std::size_t> fixed(b.begin(), b.end());
  // Potential 0 at a and 1 on B, so the current out of a is sum c v_w without cancellation.
  std::vector<double> values(b.size(), 1.0);
  fixed.push_back(a);
  values.push_back(0.0);
  const std::vector<double> v = harmonic_extension(net, fixed, values);
  double current = 0.0;
  bool reaches = false;
  for (const auto& [w, k] : net.incident(a)) {
    if (std::isnan(v[w])) continue;
    current += net.scaled_conductance(k) * v[w];
  }
  // a is connected to B iff some vertex of B is in a's component.
  std::vector<char> seen(net.vertex_count(), 0);
  std::vector<std::size_t> stack{a};
  seen[a] = 1;
  std::vector<char> in_b(net.vertex_count(), 0);
  for (std::size_t v : b) in_b[v] = 1;
  while (!stack.empty() && !reaches) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const auto& [w, k] : net.incident(v)) {
      if (in_b[w]) reaches = true;
      if (!seen[w] && !in_b[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  if (!reaches || !(current > 0.0)) throw Error(ErrorCode::kSingularSystem, "a is not connected to B");
  return std::exp(-net.log_scale()) / current;
}

double hit_before(const FiniteNetwork& net, std::size_t start, std::size_t target, std::span<const std::size_t> avoid) {
  if (start == target || std::find(avoid.begin(), avoid.end(), start) != avoid.end()) {
    throw Error(ErrorCode::kDomainError, "start must differ from the target and the avoided set");
  }
  if (start >= net.vertex_count() || target >= net.vertex_count()) throw Error(ErrorCode::kDomainError, "vertex out of range");
  std::vector<std::size_t> fixed(avoid.begin(), avoid.end());
  std::vector<double> values(avoid.size(), 0.0);
  fixed.push_back(target);
  values.push_back(1.0);
  const std::vector<double> u = harmonic_extension(net, fixed, values);
  if (std::isnan(u[start])) throw Error(ErrorCode::kSingularSystem, "start is not connected to the target or avoided set");
  return std::clamp(u[start], 0.0, 1.0);
}

double escape_probability(const FiniteNetwork& net, std::size_t a, std::span<const std::size_t> b) {
  return 1.0 / (net.vertex_conductance(a) * effective_resistance(net, a, b));
}

NeverReturnBracket never_return_probability(const FiniteNetwork& net, std::size_t x,
                                            std::span<const std::size_t> far_boundary, std::size_t exit,
                                            double tail_resistance) {
  if (!(tail_resistance >= 0.0)) throw Error(ErrorCode::kDomainError, "tail resistance must be non-negative");
  NeverReturnBracket out;
  out.r_lower = effective_resistance(net, x, far_boundary);
  const std::size_t exits[] = {exit};
  out.r_upper = effective_resistance(net, x, exits) + tail_resistance;
  const double cx = net.vertex_conductance(x);
  out.lower = 1.0 / (cx * out.r_upper);
  out.upper = std::min(1.0, 1.0 / (cx * out.r_lower));
  return out;
}

double straight_tail_resistance(const ConductanceParams& params, const LatticePoint& from) {
  const double lead = params.direction().raw.at(0);
  if (!(lead > 0.0)) throw Error(ErrorCode::kDomainError, "conductances do not grow along e_1");
  // sum_{k>=0} 1/c(from + k e1, from + (k+1) e1), a geometric series.
  const LatticePoint next = from.shifted(Direction{0, 1});
  const double first = params.log_conductance(from, next);
  return std::exp(-first) / (1.0 - std::exp(-lead));
}

HitFrequency simulate_hit_before(const FiniteNetwork& net, std::size_t start, std::size_t target,
                                 std::span<const std::size_t> avoid, std::uint64_t trials, CounterRng& rng) {
  const std::size_t n = net.vertex_count();
  std::vector<signed char> absorb(n, -1);
  for (std::size_t v : avoid) absorb.at(v) = 0;
  absorb.at(target) = 1;
  if (absorb.at(start) >= 0) throw Error(ErrorCode::kDomainError, "start must differ from the target and the avoided set");
  // Absorption must be reachable from start.
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  bool reachable = false;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const auto& [w, k] : net.incident(v)) {
      if (absorb[w] >= 0) reachable = true;
      if (!seen[w] && absorb[w] < 0) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  if (!reachable) throw Error(ErrorCode::kSingularSystem, "no absorbing vertex reachable from start");
  std::vector<double> total(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [w, k] : net.incident(v)) total[v] += net.scaled_conductance(k);
  }
  HitFrequency out;
  out.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::size_t v = start;
    while (absorb[v] < 0) {
      double target_mass = rng.uniform() * total[v];
      const auto inc = net.incident(v);
      std::size_t next = inc.back().first;
      for (const auto& [w, k] : inc) {
        target_mass -= net.scaled_conductance(k);
        if (target_mass < 0.0) {
          next = w;
          break;
        }
      }
      v = next;
    }
    out.hits += static_cast<std::uint64_t>(absorb[v]);
  }
  return out;
}

void save_fixture(std::ostream& out, const TraceGraph& g, const BiasDistribution& p) {
  if (g.dimension() != p.dimension()) throw Error(ErrorCode::kDomainError, "dimension mismatch");
  g.save(out);
  out.write(kBiasMagic, 4);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.dimension()));
  for (double w : p.weights()) detail::write_le<double>(out, w);
  if (!out) throw Error(ErrorCode::kIoError, "failed to write fixture");
}

std::pair<TraceGraph, BiasDistribution> load_fixture(std::istream& in) {
  TraceGraph g = TraceGraph::load(in);
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kBiasMagic)) throw Error(ErrorCode::kIoError, "missing bias record");
  const auto dim = static_cast<int>(detail::read_le<std::uint32_t>(in));
  if (dim != g.dimension()) throw Error(ErrorCode::kIoError, "bias record dimension mismatch");
  std::vector<double> w(static_cast<std::size_t>(2 * dim));
  for (double& x : w) x = detail::read_le<double>(in);
  return {std::move(g), BiasDistribution(dim, std::move(w))};
}

}  // namespace rwtrace
