#include <doctest.h>

#include <random>
#include <stdexcept>

#include "rssloc/geometry.hpp"

using namespace rssloc;

TEST_CASE("distance on 3-4-5 triangles") {
  CHECK(distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
  CHECK(distance({1, 1}, {1, 1}) == 0.0);
  CHECK(distance({-3, 0}, {0, 4}) == doctest::Approx(5.0));
}

TEST_CASE("distance is a metric on random triples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-500, 500);
  for (int i = 0; i < 1000; ++i) {
    const Position a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    CHECK(distance(a, b) == distance(b, a));
    CHECK(distance(a, b) >= 0.0);
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
  }
}

TEST_CASE("box helpers") {
  const Box b = box_around({10, 10}, 15);
  CHECK(b == Box{{-5, -5}, {25, 25}});
  CHECK(b.contains({-5, 25}));
  CHECK_FALSE(b.contains({-5.001, 0}));
  CHECK(b.area() == doctest::Approx(900));
  CHECK(b.clamp({40, -10}) == Position{25, -5});
  CHECK(intersect(b, Box{{0, 0}, {100, 100}}) == Box{{0, 0}, {25, 25}});
  CHECK(intersect(b, Box{{30, 30}, {40, 40}}).empty());
}

TEST_CASE("polygon contains counts the boundary") {
  const Polygon square({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  CHECK(square.area() == doctest::Approx(100));
  CHECK(square.contains({5, 5}));
  CHECK(square.contains({0, 5}));
  CHECK(square.contains({10, 10}));
  CHECK_FALSE(square.contains({10.01, 5}));
  CHECK(square.bounding_box() == Box{{0, 0}, {10, 10}});

  const Polygon ell({{0, 0}, {20, 0}, {20, 10}, {10, 10}, {10, 20}, {0, 20}});
  CHECK(ell.contains({5, 15}));
  CHECK_FALSE(ell.contains({15, 15}));
}

TEST_CASE("polygon rejects degenerate rings") {
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {2, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(Polygon({{0, 0}, {10, 10}, {10, 0}, {0, 10}}), std::invalid_argument);  // bow tie
}

TEST_CASE("lattice points are anchored to the global lattice") {
  const auto pts = lattice_points(Box{{0.5, 0.5}, {3.2, 2.0}}, 1.0);
  const std::vector<Position> expected{{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}, {3, 2}};
  CHECK(pts == expected);

  const auto tri = lattice_points(Polygon({{0, 0}, {4, 0}, {0, 4}}), 1.0);
  CHECK(tri.size() == 15);  // 5 + 4 + 3 + 2 + 1, edges included
  for (const auto& p : tri) CHECK(p.x + p.y <= 4.0);

  CHECK(lattice_points(Box{{5, 5}, {5, 5}}, 1.0) == std::vector<Position>{{5, 5}});
  CHECK(lattice_points(Box{{0.2, 0.2}, {0.8, 0.8}}, 1.0).empty());
}
