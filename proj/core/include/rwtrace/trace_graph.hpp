#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "rwtrace/lattice.hpp"

namespace rwtrace {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

// Nearest-neighbour lattice path starting at the origin. Coordinates are kept
// in one flat buffer (dimension() entries per point).
class WalkPath {
 public:
  explicit WalkPath(int dimension, std::uint64_t seed = 0, int generation = 0);

  // Throws NonAdjacentStep if consecutive points are not lattice neighbours
  // or the first point is not the origin.
  static WalkPath from_points(std::span<const LatticePoint> points, std::uint64_t seed = 0, int generation = 0);

  int dimension() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  int generation() const { return generation_; }

  // Number of points, i.e. steps() + 1.
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  std::size_t steps() const { return size() - 1; }

  LatticePoint point(std::size_t n) const;
  LatticePoint back() const { return point(size() - 1); }
  std::int64_t coord(std::size_t n, int axis) const { return coords_[n * dim_ + axis]; }
  std::span<const std::int64_t> coords(std::size_t n) const { return {coords_.data() + n * dim_, static_cast<std::size_t>(dim_)}; }

  void push_back(const LatticePoint& next);
  void push_step(Direction dir);

  // Keeps points [0, n].
  void truncate(std::size_t n);

  double projection(std::size_t n, std::span<const double> direction) const;

  void reserve(std::size_t points) { coords_.reserve(points * dim_); }

  friend bool operator==(const WalkPath& a, const WalkPath& b) { return a.dim_ == b.dim_ && a.coords_ == b.coords_; }

 private:
  int dim_;
  std::uint64_t seed_;
  int generation_;
  std::vector<std::int64_t> coords_;
};

// Trace of a nearest-neighbour walk: the visited vertices and traversed
// (undirected) edges. Vertices live in an open-addressing hash index over
// packed coordinates; edges are a per-vertex bitmask over the 2d directions,
// stored on both endpoints.
//
// settled_level() is the certified frontier: no vertex with first coordinate
// strictly below it will gain an edge, so the neighbourhood of such a vertex
// is final.
class TraceGraph {
 public:
  explicit TraceGraph(int dimension);

  static TraceGraph from_path(const WalkPath& path);

  // Appends a path segment whose first point is the current tip (the last
  // point of the path that generated this graph). Empty segments are no-ops.
  void extend(std::span<const LatticePoint> segment);
  void extend(const WalkPath& path, std::size_t from_index);

  // Inner-loop variant of extend: one step from the tip in direction dir.
  // Returns the id of the new tip.
  VertexId append_step(Direction dir);

  int dimension() const { return dim_; }
  std::size_t vertex_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  VertexId find(const LatticePoint& x) const;
  VertexId find(std::span<const std::int64_t> coords) const;
  bool contains(const LatticePoint& x) const { return find(x) != kNoVertex; }

  LatticePoint vertex(VertexId id) const;
  std::int64_t vertex_coord(VertexId id, int axis) const { return coords_[static_cast<std::size_t>(id) * dim_ + axis]; }

  // Bit k set iff the edge in Direction::from_index(k) is present.
  std::uint32_t adjacency(VertexId id) const { return adjacency_[id]; }
  bool has_edge(const LatticePoint& x, Direction dir) const;

  // Neighbours joined by present edges, ordered by direction index. Throws
  // VertexAbsent when x is not a vertex.
  std::vector<LatticePoint> neighbors(const LatticePoint& x) const;
  int degree(const LatticePoint& x) const;

  const LatticePoint& tip() const { return tip_; }
  VertexId tip_id() const { return tip_id_; }

  double settled_level() const { return settled_level_; }
  void certify_settled(double level);
  bool is_settled(const LatticePoint& x) const { return static_cast<double>(x[0]) < settled_level_; }

  // Exact vertex and edge inclusion.
  bool is_subgraph_of(const TraceGraph& other) const;

  // Binary dump; see docs/trace_format.md.
  void save(std::ostream& out) const;
  static TraceGraph load(std::istream& in);

  // Same vertices in the same insertion order with the same edges.
  friend bool operator==(const TraceGraph& a, const TraceGraph& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_ && a.adjacency_ == b.adjacency_;
  }

 private:
  VertexId insert_vertex(std::span<const std::int64_t> coords);
  void add_edge(VertexId a, VertexId b, Direction dir_from_a);
  void grow();
  std::size_t slot_of(std::span<const std::int64_t> coords) const;

  int dim_;
  std::vector<std::int64_t> coords_;
  std::vector<std::uint16_t> adjacency_;
  std::vector<VertexId> slots_;
  std::size_t slot_mask_ = 0;
  std::size_t edge_count_ = 0;
  double settled_level_ = -std::numeric_limits<double>::infinity();
  LatticePoint tip_;
  VertexId tip_id_ = 0;
};

}  // namespace rwtrace
