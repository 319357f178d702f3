#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rssloc/estimators.hpp"

using namespace rssloc;

namespace {

const std::vector<Position> kCorners{{0, 0}, {100, 0}, {0, 100}};

std::vector<UlMeasurement> noiseless(const Position& truth, const std::vector<Position>& receivers, double p0 = -30,
                                     double beta = 3) {
  std::vector<UlMeasurement> m;
  for (const auto& r : receivers) m.push_back({r, expected_rss({p0, beta, 0, 1}, truth, r)});
  return m;
}

}  // namespace

TEST_CASE("mle_cost") {
  const auto m = noiseless({30, 40}, kCorners);
  CHECK(mle_cost({{30, 40}, -30}, m, 3) < 1e-20);

  const std::vector<UlMeasurement> one{{{0, 0}, -60}};
  CHECK(mle_cost({{10, 0}, -30}, one, 3) == doctest::Approx(0).scale(1));
  CHECK(mle_cost({{100, 0}, -30}, one, 3) == doctest::Approx(900));
  CHECK_THROWS_AS(mle_cost({{0, 0}, 0}, std::vector<UlMeasurement>{}, 3), std::invalid_argument);
}

TEST_CASE("closed_form_p0") {
  const std::vector<UlMeasurement> one{{{0, 0}, -60}};
  CHECK(closed_form_p0({10, 0}, one, 3) == doctest::Approx(-30));
  CHECK(closed_form_p0({30, 40}, noiseless({30, 40}, kCorners), 3) == doctest::Approx(-30));
}

TEST_CASE("closed_form_p0 agrees with a fine sweep") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0, 100), noise(-8, 8);
  for (int inst = 0; inst < 1000; ++inst) {
    std::vector<UlMeasurement> m;
    const Position truth{pos(rng), pos(rng)};
    const int n = 3 + inst % 4;
    for (int i = 0; i < n; ++i) {
      const Position r{pos(rng), pos(rng)};
      m.push_back({r, expected_rss({-40, 3, 0, 1}, truth, r) + noise(rng)});
    }
    const Position x{pos(rng), pos(rng)};
    const double p0 = closed_form_p0(x, m, 3);
    if (p0 < -100 || p0 > 0) continue;
    CHECK(std::abs(p0 - oracle::sweep_p0(x, m, 3, -100, 0, 0.01)) <= 0.01);
    // optimality: perturbing p0 never lowers the cost
    CHECK(mle_cost({x, p0}, m, 3) <= mle_cost({x, p0 + 0.01}, m, 3));
    CHECK(mle_cost({x, p0}, m, 3) <= mle_cost({x, p0 - 0.01}, m, 3));
  }
}

TEST_CASE("grid_search_mle recovers an on-grid truth") {
  const auto m = noiseless({30, 40}, kCorners);
  const auto r = grid_search_mle({Box{{0, 0}, {100, 100}}, 1.0}, m, 3);
  CHECK(r.theta.x == Position{30, 40});
  CHECK(r.theta.p0 == doctest::Approx(-30));
  CHECK(r.cost < 1e-18);
  CHECK(r.points_evaluated == 101 * 101);
}

TEST_CASE("grid_search_mle outside the truth stops on the boundary") {
  const auto m = noiseless({30, 40}, kCorners);
  const auto r = grid_search_mle({Box{{50, 50}, {80, 80}}, 1.0}, m, 3);
  CHECK((r.theta.x.x == 50 || r.theta.x.y == 50));
  CHECK(r.cost > 0);
  const auto o = oracle::exhaustive_grid(50, 80, 50, 80, m, 3);
  CHECK(r.theta.x == o.first);
  CHECK(r.cost == doctest::Approx(o.second));
}

TEST_CASE("grid_search_mle on a single point and an empty grid") {
  const auto m = noiseless({30, 40}, kCorners);
  const auto r = grid_search_mle({Box{{7, 9}, {7, 9}}, 1.0}, m, 3);
  CHECK(r.theta.x == Position{7, 9});
  CHECK(r.points_evaluated == 1);
  CHECK_THROWS_AS(grid_search_mle({Box{{7.2, 9.2}, {7.8, 9.8}}, 1.0}, m, 3), std::invalid_argument);
  CHECK_THROWS_AS(grid_search_mle({Box{{0, 0}, {1, 1}}, 0.0}, m, 3), std::invalid_argument);
}

TEST_CASE("grid_search_mle matches the exhaustive oracle under noise") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pos(0, 60);
  std::normal_distribution<double> noise(0, 4);
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<UlMeasurement> m;
    const Position truth{pos(rng), pos(rng)};
    for (int i = 0; i < 4; ++i) {
      const Position r{pos(rng), pos(rng)};
      m.push_back({r, expected_rss({-30, 3, 0, 1}, truth, r) + noise(rng)});
    }
    const auto r = grid_search_mle({Box{{0, 0}, {60, 60}}, 1.0}, m, 3);
    const auto o = oracle::exhaustive_grid(0, 60, 0, 60, m, 3);
    CHECK(r.theta.x == o.first);
  }
}

TEST_CASE("grid search over a polygon stays inside it") {
  const Polygon tri({{0, 0}, {40, 0}, {0, 40}});
  const auto m = noiseless({35, 35}, kCorners);
  const auto r = grid_search_mle({tri, 1.0}, m, 3);
  CHECK(tri.contains(r.theta.x));
  CHECK(r.theta.x.x + r.theta.x.y == 40);  // the truth is beyond the hypotenuse
}

TEST_CASE("rand_init") {
  std::mt19937_64 rng(1);
  double sx = 0, sy = 0;
  const Box b{{0, 0}, {100, 100}};
  for (int i = 0; i < 10000; ++i) {
    const auto p = rand_init(b, rng);
    CHECK(b.contains(p));
    sx += p.x;
    sy += p.y;
  }
  CHECK(std::abs(sx / 10000 - 50) < 2);
  CHECK(std::abs(sy / 10000 - 50) < 2);

  CHECK(rand_init(Box{{5, 5}, {5, 5}}, rng) == Position{5, 5});
  CHECK_THROWS_AS(rand_init(Box{{5, 5}, {4, 4}}, rng), std::invalid_argument);

  std::mt19937_64 a(77), c(77);
  CHECK(rand_init(b, a) == rand_init(b, c));

  const Polygon tri({{0, 0}, {10, 0}, {0, 10}});
  for (int i = 0; i < 200; ++i) CHECK(tri.contains(rand_init(SearchRegion{tri}, rng)));
}

TEST_CASE("fp_mle_cost") {
  const auto m = noiseless({30, 40}, kCorners);
  const FingerprintMap map({{{30, 40}, PositionLabel{{30, 40}}, {{"bs", -70}}},
                            {{60, 40}, PositionLabel{{60, 40}}, {{"bs", -80}}}});
  const UnknownVector theta{{31, 41}, -31};
  CHECK(fp_mle_cost(theta, m, 3, {{"bs", -55}}, map, 0.0) == mle_cost(theta, m, 3));
  CHECK(fp_mle_cost(theta, m, 3, {{"bs", -70}}, map, 0.01) == doctest::Approx(mle_cost(theta, m, 3)));
  CHECK(fp_mle_cost(theta, m, 3, {{"bs", -60}}, map, 0.01) == doctest::Approx(mle_cost(theta, m, 3) + 1.0));
  // base stations missing from the map are ignored
  CHECK(fp_mle_cost(theta, m, 3, {{"bs", -70}, {"other", 0}}, map, 0.01) == doctest::Approx(mle_cost(theta, m, 3)));
}

TEST_CASE("grid_search_fp with zero weight is the plain search") {
  const auto m = noiseless({30, 40}, kCorners);
  const FingerprintMap map({{{0, 0}, PositionLabel{{0, 0}}, {{"bs", -70}}}});
  const GridSpec g{Box{{0, 0}, {100, 100}}, 1.0};
  const auto a = grid_search_fp(g, m, 3, {{"bs", 0}}, map, 0.0);
  const auto b = grid_search_mle(g, m, 3);
  CHECK(a.theta.x == b.theta.x);
  CHECK(a.cost == b.cost);
  CHECK_THROWS_AS(grid_search_fp(g, m, 3, {{"bs", 0}}, map, -1.0), std::invalid_argument);
}

TEST_CASE("strategy names round-trip") {
  for (auto s : {Strategy::Rand, Strategy::Sdp, Strategy::Fp}) CHECK(parse_strategy(strategy_name(s)) == s);
  CHECK_THROWS_AS(parse_strategy("mle"), std::invalid_argument);
}

TEST_CASE("localize on noiseless data") {
  const Box bounds{{0, 0}, {100, 100}};
  LocalizeConfig cfg;
  cfg.bounds = bounds;
  const double tol = std::sqrt(2.0) / 2.0;

  // FP: a position-labelled map whose DL vectors identify each site
  std::vector<FingerprintEntry> entries;
  const PathLossModel dl{-20, 3, 0, 1};
  for (int x = 0; x <= 100; x += 10)
    for (int y = 0; y <= 100; y += 10) {
      const Position p{double(x), double(y)};
      entries.push_back({p, PositionLabel{p}, {{"a", expected_rss(dl, {150, 50}, p)}, {"b", expected_rss(dl, {50, 150}, p)}}});
    }
  const FingerprintMap map(entries);

  std::mt19937_64 pick(4);
  std::uniform_int_distribution<int> coord(0, 10);
  for (int i = 0; i < 30; ++i) {
    // sites of the map, so the fingerprint term vanishes at the truth
    const Position truth{10.0 * coord(pick), 10.0 * coord(pick)};
    const auto m = noiseless(truth, kCorners);
    const RssVector dlv{{"a", expected_rss(dl, {150, 50}, truth)}, {"b", expected_rss(dl, {50, 150}, truth)}};
    std::mt19937_64 rng(i);
    LocalizeInputs in{m, 3.0, &dlv, &map, &rng};

    const auto fp = localize(Strategy::Fp, cfg, in);
    CHECK(distance(fp.estimate, truth) <= tol);
    const auto sdp = localize(Strategy::Sdp, cfg, in);
    CHECK(distance(sdp.estimate, truth) <= tol);
    CHECK(region_contains(sdp.region, sdp.estimate));
  }
}

TEST_CASE("localize RAND is reproducible and needs a stream") {
  LocalizeConfig cfg;
  cfg.bounds = {{0, 0}, {100, 100}};
  const auto m = noiseless({30, 40}, kCorners);
  std::mt19937_64 a(5), b(5);
  const auto ra = localize(Strategy::Rand, cfg, {m, 3.0, nullptr, nullptr, &a});
  const auto rb = localize(Strategy::Rand, cfg, {m, 3.0, nullptr, nullptr, &b});
  CHECK(ra.estimate == rb.estimate);
  CHECK(ra.initial_point == rb.initial_point);
  CHECK(cfg.bounds.contains(ra.estimate));
  CHECK_THROWS_AS(localize(Strategy::Rand, cfg, {m, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(localize(Strategy::Fp, cfg, {m, 3.0}), std::invalid_argument);
}

TEST_CASE("localize clips boxes to the bounds") {
  LocalizeConfig cfg;
  cfg.bounds = {{0, 0}, {100, 100}};
  const auto m = noiseless({1, 1}, kCorners);
  const auto r = localize(Strategy::Sdp, cfg, {m, 3.0});
  const Box box = std::get<Box>(r.region);
  CHECK(box.min.x >= 0);
  CHECK(box.min.y >= 0);
  CHECK(r.estimate == Position{1, 1});
}

TEST_CASE("localize FP with a category label searches the polygon") {
  const Polygon hall({{60, 60}, {90, 60}, {90, 90}, {60, 90}});
  const Polygon yard({{0, 0}, {30, 0}, {30, 30}, {0, 30}});
  const FingerprintMap map({{{75, 75}, CategoryLabel{"hall", hall}, {{"a", -60}}},
                            {{15, 15}, CategoryLabel{"yard", yard}, {{"a", -80}}}});
  LocalizeConfig cfg;
  cfg.bounds = {{0, 0}, {100, 100}};
  const Position truth{70, 80};
  const auto m = noiseless(truth, kCorners);
  const RssVector dlv{{"a", -61}};
  const auto r = localize(Strategy::Fp, cfg, {m, 3.0, &dlv, &map});
  CHECK(std::holds_alternative<Polygon>(r.region));
  CHECK(r.initial_point == Position{75, 75});
  CHECK(r.estimate == truth);
}
