#include "rwtrace/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "rwtrace/errors.hpp"

namespace rwtrace {

std::string to_string(Direction dir) {
  return std::string(dir.sign > 0 ? "+e" : "-e") + std::to_string(dir.axis + 1);
}

LatticePoint::LatticePoint(int dimension) : dim_(dimension) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw Error(ErrorCode::kDomainError, "lattice dimension out of range: " + std::to_string(dimension));
  }
}

LatticePoint::LatticePoint(std::initializer_list<std::int64_t> coords)
    : LatticePoint(static_cast<int>(coords.size())) {
  int j = 0;
  for (auto c : coords) coords_[j++] = c;
}

LatticePoint LatticePoint::from_span(std::span<const std::int64_t> coords) {
  LatticePoint p(static_cast<int>(coords.size()));
  for (std::size_t j = 0; j < coords.size(); ++j) p.coords_[j] = coords[j];
  return p;
}

LatticePoint LatticePoint::operator+(const LatticePoint& other) const {
  LatticePoint p = *this;
  for (int j = 0; j < dim_; ++j) p.coords_[j] += other.coords_[j];
  return p;
}

LatticePoint LatticePoint::operator-(const LatticePoint& other) const {
  LatticePoint p = *this;
  for (int j = 0; j < dim_; ++j) p.coords_[j] -= other.coords_[j];
  return p;
}

std::int64_t LatticePoint::l1_norm() const {
  std::int64_t s = 0;
  for (int j = 0; j < dim_; ++j) s += std::llabs(coords_[j]);
  return s;
}

LatticePoint join(const LatticePoint& x, const LatticePoint& y) {
  LatticePoint p = x;
  for (int j = 0; j < x.dim_; ++j) p.coords_[j] = std::max(x.coords_[j], y.coords_[j]);
  return p;
}

bool operator==(const LatticePoint& a, const LatticePoint& b) {
  if (a.dim_ != b.dim_) return false;
  for (int j = 0; j < a.dim_; ++j) {
    if (a.coords_[j] != b.coords_[j]) return false;
  }
  return true;
}

std::string LatticePoint::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int j = 0; j < dim_; ++j) {
    if (j) os << ',';
    os << coords_[j];
  }
  os << ')';
  return os.str();
}

LatticePoint unit_vector(int dimension, Direction dir) {
  LatticePoint p(dimension);
  p[dir.axis] = dir.sign;
  return p;
}

bool adjacent_direction(const LatticePoint& x, const LatticePoint& y, Direction* out) {
  if (x.dimension() != y.dimension()) return false;
  int axis = -1;
  for (int j = 0; j < x.dimension(); ++j) {
    const std::int64_t diff = y[j] - x[j];
    if (diff == 0) continue;
    if (axis != -1 || (diff != 1 && diff != -1)) return false;
    axis = j;
  }
  if (axis == -1) return false;
  if (out) *out = Direction{axis, static_cast<int>(y[axis] - x[axis])};
  return true;
}

}  // namespace rwtrace
