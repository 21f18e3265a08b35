#include "rwtrace/trace_graph.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "binary_io.hpp"
#include "rwtrace/errors.hpp"

namespace rwtrace {

// ---------------------------------------------------------------------------
// WalkPath

WalkPath::WalkPath(int dimension, std::uint64_t seed, int generation)
    : dim_(dimension), seed_(seed), generation_(generation) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw Error(ErrorCode::kDomainError, "path dimension out of range");
  }
  coords_.assign(static_cast<std::size_t>(dim_), 0);
}

WalkPath WalkPath::from_points(std::span<const LatticePoint> points, std::uint64_t seed, int generation) {
  if (points.empty()) throw Error(ErrorCode::kNonAdjacentStep, "empty point list");
  WalkPath path(points.front().dimension(), seed, generation);
  if (!(points.front() == LatticePoint(path.dim_))) {
    throw Error(ErrorCode::kNonAdjacentStep, "path must start at the origin, got " + points.front().to_string());
  }
  path.reserve(points.size());
  for (std::size_t n = 1; n < points.size(); ++n) path.push_back(points[n]);
  return path;
}

LatticePoint WalkPath::point(std::size_t n) const {
  return LatticePoint::from_span(coords(n));
}

void WalkPath::push_back(const LatticePoint& next) {
  Direction dir;
  if (next.dimension() != dim_ || !adjacent_direction(back(), next, &dir)) {
    throw Error(ErrorCode::kNonAdjacentStep,
                "step " + std::to_string(steps()) + " from " + back().to_string() + " to " + next.to_string());
  }
  push_step(dir);
}

void WalkPath::push_step(Direction dir) {
  const std::size_t base = coords_.size() - dim_;
  for (int j = 0; j < dim_; ++j) coords_.push_back(coords_[base + j]);
  coords_[coords_.size() - dim_ + dir.axis] += dir.sign;
}

void WalkPath::truncate(std::size_t n) {
  if (n + 1 < size()) coords_.resize((n + 1) * dim_);
}

double WalkPath::projection(std::size_t n, std::span<const double> direction) const {
  double s = 0.0;
  const std::int64_t* c = coords_.data() + n * dim_;
  for (int j = 0; j < dim_; ++j) s += static_cast<double>(c[j]) * direction[j];
  return s;
}

// ---------------------------------------------------------------------------
// TraceGraph

namespace {

using detail::read_le;
using detail::write_le;

constexpr std::size_t kInitialSlots = 1024;

inline std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDull;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ull;
  x ^= x >> 33;
  return x;
}

inline std::uint64_t hash_coords(std::span<const std::int64_t> coords) {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (auto c : coords) h = mix(h ^ static_cast<std::uint64_t>(c)) + 0x9E3779B97F4A7C15ull;
  return h;
}

constexpr char kMagic[4] = {'R', 'W', 'T', 'G'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

TraceGraph::TraceGraph(int dimension) : dim_(dimension), tip_(dimension) {
  slots_.assign(kInitialSlots, kNoVertex);
  slot_mask_ = kInitialSlots - 1;
  const std::vector<std::int64_t> origin(static_cast<std::size_t>(dimension), 0);
  tip_id_ = insert_vertex(origin);
}

TraceGraph TraceGraph::from_path(const WalkPath& path) {
  TraceGraph g(path.dimension());
  g.extend(path, 0);
  return g;
}

std::size_t TraceGraph::slot_of(std::span<const std::int64_t> coords) const {
  std::size_t slot = hash_coords(coords) & slot_mask_;
  while (true) {
    const VertexId id = slots_[slot];
    if (id == kNoVertex) return slot;
    if (std::equal(coords.begin(), coords.end(), coords_.begin() + static_cast<std::ptrdiff_t>(id) * dim_)) return slot;
    slot = (slot + 1) & slot_mask_;
  }
}

VertexId TraceGraph::find(std::span<const std::int64_t> coords) const {
  return slots_[slot_of(coords)];
}

VertexId TraceGraph::find(const LatticePoint& x) const {
  if (x.dimension() != dim_) return kNoVertex;
  return find(x.coords());
}

void TraceGraph::grow() {
  const std::size_t n = slots_.size() * 2;
  slots_.assign(n, kNoVertex);
  slot_mask_ = n - 1;
  for (VertexId id = 0; id < adjacency_.size(); ++id) {
    std::span<const std::int64_t> c(coords_.data() + static_cast<std::size_t>(id) * dim_, dim_);
    std::size_t slot = hash_coords(c) & slot_mask_;
    while (slots_[slot] != kNoVertex) slot = (slot + 1) & slot_mask_;
    slots_[slot] = id;
  }
}

VertexId TraceGraph::insert_vertex(std::span<const std::int64_t> coords) {
  std::size_t slot = slot_of(coords);
  if (slots_[slot] != kNoVertex) return slots_[slot];
  // Load factor is kept at or below 0.7.
  if (10 * (adjacency_.size() + 1) > 7 * slots_.size()) {
    grow();
    slot = slot_of(coords);
  }
  const auto id = static_cast<VertexId>(adjacency_.size());
  coords_.insert(coords_.end(), coords.begin(), coords.end());
  adjacency_.push_back(0);
  slots_[slot] = id;
  return id;
}

void TraceGraph::add_edge(VertexId a, VertexId b, Direction dir_from_a) {
  const auto bit_a = static_cast<std::uint16_t>(1u << dir_from_a.index());
  if (adjacency_[a] & bit_a) return;
  adjacency_[a] |= bit_a;
  adjacency_[b] |= static_cast<std::uint16_t>(1u << dir_from_a.opposite().index());
  ++edge_count_;
}

VertexId TraceGraph::append_step(Direction dir) {
  const LatticePoint next = tip_.shifted(dir);
  const VertexId id = insert_vertex(next.coords());
  add_edge(tip_id_, id, dir);
  tip_ = next;
  tip_id_ = id;
  return id;
}

void TraceGraph::extend(std::span<const LatticePoint> segment) {
  if (segment.empty()) return;
  if (!(segment.front() == tip_)) {
    throw Error(ErrorCode::kDiscontinuousExtension,
                "segment starts at " + segment.front().to_string() + " but the trace tip is " + tip_.to_string());
  }
  for (std::size_t n = 1; n < segment.size(); ++n) {
    Direction dir;
    if (!adjacent_direction(segment[n - 1], segment[n], &dir)) {
      throw Error(ErrorCode::kNonAdjacentStep, "segment step " + std::to_string(n));
    }
    append_step(dir);
  }
}

void TraceGraph::extend(const WalkPath& path, std::size_t from_index) {
  if (from_index >= path.size()) return;
  if (path.dimension() != dim_ || !std::equal(tip_.coords().begin(), tip_.coords().end(), path.coords(from_index).begin())) {
    throw Error(ErrorCode::kDiscontinuousExtension,
                "segment starts at " + path.point(from_index).to_string() + " but the trace tip is " + tip_.to_string());
  }
  for (std::size_t n = from_index + 1; n < path.size(); ++n) {
    int axis = -1;
    int sign = 0;
    for (int j = 0; j < dim_; ++j) {
      const std::int64_t diff = path.coord(n, j) - path.coord(n - 1, j);
      if (diff != 0) {
        axis = j;
        sign = static_cast<int>(diff);
      }
    }
    append_step(Direction{axis, sign});
  }
}

LatticePoint TraceGraph::vertex(VertexId id) const {
  return LatticePoint::from_span({coords_.data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)});
}

bool TraceGraph::has_edge(const LatticePoint& x, Direction dir) const {
  const VertexId id = find(x);
  return id != kNoVertex && (adjacency_[id] >> dir.index()) & 1u;
}

std::vector<LatticePoint> TraceGraph::neighbors(const LatticePoint& x) const {
  const VertexId id = find(x);
  if (id == kNoVertex) throw Error(ErrorCode::kVertexAbsent, x.to_string());
  std::vector<LatticePoint> out;
  for (int k = 0; k < 2 * dim_; ++k) {
    if ((adjacency_[id] >> k) & 1u) out.push_back(x.shifted(Direction::from_index(k)));
  }
  return out;
}

int TraceGraph::degree(const LatticePoint& x) const {
  const VertexId id = find(x);
  if (id == kNoVertex) throw Error(ErrorCode::kVertexAbsent, x.to_string());
  return std::popcount(static_cast<unsigned>(adjacency_[id]));
}

void TraceGraph::certify_settled(double level) {
  settled_level_ = std::max(settled_level_, level);
}

bool TraceGraph::is_subgraph_of(const TraceGraph& other) const {
  if (other.dim_ != dim_) return false;
  for (VertexId id = 0; id < adjacency_.size(); ++id) {
    std::span<const std::int64_t> c(coords_.data() + static_cast<std::size_t>(id) * dim_, dim_);
    const VertexId oid = other.find(c);
    if (oid == kNoVertex) return false;
    if ((adjacency_[id] & ~other.adjacency_[oid]) != 0) return false;
  }
  return true;
}

void TraceGraph::save(std::ostream& out) const {
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kFormatVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  write_le<std::uint64_t>(out, vertex_count());
  write_le<double>(out, settled_level_);
  for (int j = 0; j < dim_; ++j) write_le<std::int64_t>(out, tip_[j]);
  for (VertexId id = 0; id < adjacency_.size(); ++id) {
    for (int j = 0; j < dim_; ++j) write_le<std::int64_t>(out, vertex_coord(id, j));
    write_le<std::uint16_t>(out, adjacency_[id]);
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing trace");
}

TraceGraph TraceGraph::load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kMagic)) throw Error(ErrorCode::kIoError, "not a trace file");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kFormatVersion) throw Error(ErrorCode::kIoError, "unsupported trace format version " + std::to_string(version));
  const auto dim = static_cast<int>(read_le<std::uint32_t>(in));
  if (!in || dim < 1 || dim > kMaxDimension) throw Error(ErrorCode::kIoError, "bad trace dimension");
  const auto count = read_le<std::uint64_t>(in);
  const auto settled = read_le<double>(in);
  TraceGraph g(dim);
  LatticePoint tip(dim);
  for (int j = 0; j < dim; ++j) tip[j] = read_le<std::int64_t>(in);
  std::vector<std::int64_t> c(static_cast<std::size_t>(dim));
  std::vector<std::uint16_t> masks;
  masks.reserve(count);
  for (std::uint64_t v = 0; v < count; ++v) {
    for (int j = 0; j < dim; ++j) c[j] = read_le<std::int64_t>(in);
    const auto mask = read_le<std::uint16_t>(in);
    const VertexId id = g.insert_vertex(c);
    if (id != v) throw Error(ErrorCode::kIoError, "duplicate vertex in trace file");
    masks.push_back(mask);
  }
  std::size_t half_edges = 0;
  for (auto m : masks) half_edges += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(m)));
  g.adjacency_ = std::move(masks);
  g.edge_count_ = half_edges / 2;
  g.settled_level_ = settled;
  g.tip_ = tip;
  g.tip_id_ = g.find(tip);
  if (g.tip_id_ == kNoVertex) throw Error(ErrorCode::kIoError, "trace tip is not a vertex");
  return g;
}

}  // namespace rwtrace
