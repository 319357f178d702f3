#pragma once

#include <compare>
#include <span>
#include <variant>
#include <vector>

namespace rssloc {

/// 2D position in meters (x east, y north).
struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

/// Axis-aligned box [min.x, max.x] x [min.y, max.y]. Degenerate boxes are allowed.
struct Box {
  Position min;
  Position max;

  bool contains(const Position& p) const;
  bool empty() const { return min.x > max.x || min.y > max.y; }
  double area() const;
  Position clamp(const Position& p) const;

  friend bool operator==(const Box&, const Box&) = default;
};

Box box_around(const Position& center, double half_width);
Box intersect(const Box& a, const Box& b);

/// Simple polygon given by its vertices in order (either orientation, not closed).
class Polygon {
 public:
  Polygon() = default;
  /// Throws std::invalid_argument unless the ring is simple with positive area.
  explicit Polygon(std::vector<Position> vertices);

  const std::vector<Position>& vertices() const { return vertices_; }
  /// Boundary points count as inside.
  bool contains(const Position& p) const;
  double area() const;
  Box bounding_box() const;

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  std::vector<Position> vertices_;
};

using SearchRegion = std::variant<Box, Polygon>;

bool region_contains(const SearchRegion& region, const Position& p);
Box region_bounds(const SearchRegion& region);

/// Points of the lattice {(i*step, j*step)} that fall inside the region.
/// Anchoring to the global lattice keeps grid points stable across regions.
std::vector<Position> lattice_points(const SearchRegion& region, double step);

}  // namespace rssloc
