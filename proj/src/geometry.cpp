#include "rssloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rssloc {

namespace {

constexpr double kEdgeEps = 1e-9;

double cross(const Position& o, const Position& a, const Position& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Position& p, const Position& a, const Position& b) {
  if (std::abs(cross(a, b, p)) > kEdgeEps * std::max(1.0, distance(a, b))) return false;
  return p.x >= std::min(a.x, b.x) - kEdgeEps && p.x <= std::max(a.x, b.x) + kEdgeEps &&
         p.y >= std::min(a.y, b.y) - kEdgeEps && p.y <= std::max(a.y, b.y) + kEdgeEps;
}

int orientation(const Position& a, const Position& b, const Position& c) {
  const double v = cross(a, b, c);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool segments_intersect(const Position& p1, const Position& p2, const Position& q1,
                        const Position& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

double signed_area(const std::vector<Position>& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

}  // namespace

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool Box::contains(const Position& p) const {
  return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
}

double Box::area() const { return empty() ? 0.0 : (max.x - min.x) * (max.y - min.y); }

Position Box::clamp(const Position& p) const {
  return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y)};
}

Box box_around(const Position& center, double half_width) {
  return {{center.x - half_width, center.y - half_width},
          {center.x + half_width, center.y + half_width}};
}

Box intersect(const Box& a, const Box& b) {
  return {{std::max(a.min.x, b.min.x), std::max(a.min.y, b.min.y)},
          {std::min(a.max.x, b.max.x), std::min(a.max.y, b.max.y)}};
}

Polygon::Polygon(std::vector<Position> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw std::invalid_argument("polygon vertex is not finite");
  }
  if (std::abs(signed_area(vertices_)) <= 0.0)
    throw std::invalid_argument("polygon has zero area");
  // Non-adjacent edges must not touch.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n]))
        throw std::invalid_argument("polygon is self-intersecting");
    }
  }
}

bool Polygon::contains(const Position& p) const {
  const std::size_t n = vertices_.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = vertices_[i];
    const auto& b = vertices_[j];
    if (on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double Polygon::area() const { return std::abs(signed_area(vertices_)); }

Box Polygon::bounding_box() const {
  Box b{vertices_.front(), vertices_.front()};
  for (const auto& v : vertices_) {
    b.min.x = std::min(b.min.x, v.x);
    b.min.y = std::min(b.min.y, v.y);
    b.max.x = std::max(b.max.x, v.x);
    b.max.y = std::max(b.max.y, v.y);
  }
  return b;
}

bool region_contains(const SearchRegion& region, const Position& p) {
  return std::visit([&](const auto& r) { return r.contains(p); }, region);
}

Box region_bounds(const SearchRegion& region) {
  if (const auto* box = std::get_if<Box>(&region)) return *box;
  return std::get<Polygon>(region).bounding_box();
}

std::vector<Position> lattice_points(const SearchRegion& region, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("lattice step must be positive");
  const Box bounds = region_bounds(region);
  std::vector<Position> points;
  if (bounds.empty()) return points;

  const auto lo = [&](double v) { return static_cast<long>(std::ceil(v / step - 1e-9)); };
  const auto hi = [&](double v) { return static_cast<long>(std::floor(v / step + 1e-9)); };
  const long ix0 = lo(bounds.min.x), ix1 = hi(bounds.max.x);
  const long iy0 = lo(bounds.min.y), iy1 = hi(bounds.max.y);
  if (ix1 < ix0 || iy1 < iy0) return points;

  const auto* polygon = std::get_if<Polygon>(&region);
  points.reserve(static_cast<std::size_t>((ix1 - ix0 + 1) * (iy1 - iy0 + 1)));
  for (long ix = ix0; ix <= ix1; ++ix) {
    for (long iy = iy0; iy <= iy1; ++iy) {
      const Position p{static_cast<double>(ix) * step, static_cast<double>(iy) * step};
      if (polygon && !polygon->contains(p)) continue;
      points.push_back(p);
    }
  }
  return points;
}

}  // namespace rssloc
