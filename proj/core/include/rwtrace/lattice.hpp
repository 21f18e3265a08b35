#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>

namespace rwtrace {

inline constexpr int kMaxDimension = 8;

// A signed unit vector +e_axis or -e_axis (axis is 0-based).
//
// Directions are indexed 0..2d-1 in the order +e_1, -e_1, +e_2, -e_2, ...;
// every list of directions in the library (weights, neighbour lists,
// adjacency masks) follows this order.
struct Direction {
  int axis = 0;
  int sign = +1;

  constexpr int index() const { return 2 * axis + (sign > 0 ? 0 : 1); }
  constexpr Direction opposite() const { return {axis, -sign}; }

  static constexpr Direction from_index(int index) {
    return {index / 2, (index % 2 == 0) ? +1 : -1};
  }

  friend constexpr bool operator==(Direction, Direction) = default;
};

std::string to_string(Direction dir);

class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(int dimension);
  LatticePoint(std::initializer_list<std::int64_t> coords);
  static LatticePoint from_span(std::span<const std::int64_t> coords);

  int dimension() const { return dim_; }
  std::int64_t operator[](int axis) const { return coords_[axis]; }
  std::int64_t& operator[](int axis) { return coords_[axis]; }
  std::span<const std::int64_t> coords() const { return {coords_.data(), static_cast<std::size_t>(dim_)}; }

  LatticePoint shifted(Direction dir) const {
    LatticePoint p = *this;
    p.coords_[dir.axis] += dir.sign;
    return p;
  }

  LatticePoint operator+(const LatticePoint& other) const;
  LatticePoint operator-(const LatticePoint& other) const;

  // Sum of |x_j|.
  std::int64_t l1_norm() const;

  // Componentwise maximum.
  friend LatticePoint join(const LatticePoint& x, const LatticePoint& y);

  friend bool operator==(const LatticePoint& a, const LatticePoint& b);

  std::string to_string() const;

 private:
  std::array<std::int64_t, kMaxDimension> coords_{};
  int dim_ = 0;
};

LatticePoint unit_vector(int dimension, Direction dir);

// Direction d with y = x + d, or no value if the points are not adjacent.
bool adjacent_direction(const LatticePoint& x, const LatticePoint& y, Direction* out);

template <class Vec>
double dot(const LatticePoint& x, const Vec& v) {
  double s = 0.0;
  for (int j = 0; j < x.dimension(); ++j) s += static_cast<double>(x[j]) * v[j];
  return s;
}

}  // namespace rwtrace
