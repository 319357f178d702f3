#include "rssloc/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "rssloc/sdp.hpp"

namespace rssloc {

namespace {

// Per-receiver P_i + 10 beta log10 d_i; its mean is the optimal p0 and its
// spread about that mean is the cost.
template <typename Fn>
void for_each_offset(const Position& x, UlMeasurements m, double beta, Fn&& fn) {
  for (const auto& meas : m) fn(meas.rss_dbm + 10.0 * beta * std::log10(clamped_distance(x, meas.receiver)));
}

struct Evaluation {
  double p0;
  double cost;
};

Evaluation profile_cost(const Position& x, UlMeasurements m, double beta) {
  double sum = 0.0;
  for_each_offset(x, m, beta, [&](double a) { sum += a; });
  const double p0 = sum / static_cast<double>(m.size());
  double cost = 0.0;
  for_each_offset(x, m, beta, [&](double a) { cost += (a - p0) * (a - p0); });
  return {p0, cost};
}

double fingerprint_term(const RssVector& dl, const RssVector& stored) {
  double sum = 0.0;
  for (const auto& [id, value] : dl) {
    auto it = stored.find(id);
    if (it == stored.end()) continue;
    const double diff = value - it->second;
    sum += diff * diff;
  }
  return sum;
}

void require_measurements(UlMeasurements m) {
  if (m.empty()) throw std::invalid_argument("at least one uplink measurement is required");
}

template <typename CostFn>
GridResult search(const GridSpec& grid, CostFn&& cost_at) {
  if (!(grid.resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  const auto points = lattice_points(grid.region, grid.resolution);
  if (points.empty()) throw std::invalid_argument("search grid is empty");

  GridResult best;
  best.cost = std::numeric_limits<double>::infinity();
  // lattice_points yields x-major, y-minor ascending order, so strict < keeps the
  // lexicographically smallest of equal-cost points.
  for (const auto& p : points) {
    const Evaluation e = cost_at(p);
    if (e.cost < best.cost) {
      best.theta = {p, e.p0};
      best.cost = e.cost;
    }
  }
  best.points_evaluated = points.size();
  return best;
}

Box clip_to_bounds(const Box& box, const Box& bounds) {
  Box clipped = intersect(box, bounds);
  if (clipped.empty()) throw std::invalid_argument("search box lies outside the environment bounds");
  return clipped;
}

}  // namespace

double mle_cost(const UnknownVector& theta, UlMeasurements measurements, double beta) {
  require_measurements(measurements);
  double cost = 0.0;
  for_each_offset(theta.x, measurements, beta, [&](double a) {
    const double r = a - theta.p0;
    cost += r * r;
  });
  return cost;
}

double closed_form_p0(const Position& x, UlMeasurements measurements, double beta) {
  require_measurements(measurements);
  return profile_cost(x, measurements, beta).p0;
}

double fp_mle_cost(const UnknownVector& theta, UlMeasurements measurements, double beta,
                   const RssVector& dl_rss, const FingerprintMap& map, double w) {
  const double ul = mle_cost(theta, measurements, beta);
  if (w == 0.0) return ul;
  return ul + w * fingerprint_term(dl_rss, map_rss_at(map, theta.x));
}

GridResult grid_search_mle(const GridSpec& grid, UlMeasurements measurements, double beta) {
  require_measurements(measurements);
  return search(grid, [&](const Position& p) { return profile_cost(p, measurements, beta); });
}

GridResult grid_search_fp(const GridSpec& grid, UlMeasurements measurements, double beta,
                          const RssVector& dl_rss, const FingerprintMap& map, double w) {
  require_measurements(measurements);
  if (w < 0.0) throw std::invalid_argument("fused weight must be non-negative");
  return search(grid, [&](const Position& p) {
    Evaluation e = profile_cost(p, measurements, beta);
    if (w != 0.0) e.cost += w * fingerprint_term(dl_rss, map_rss_at(map, p));
    return e;
  });
}

Position rand_init(const Box& bounds, RandomStream& rng) {
  if (bounds.empty()) throw std::invalid_argument("random initialisation needs a non-empty box");
  const auto draw = [&](double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const double x = draw(bounds.min.x, bounds.max.x);
  const double y = draw(bounds.min.y, bounds.max.y);
  return {x, y};
}

Position rand_init(const SearchRegion& region, RandomStream& rng) {
  if (const auto* box = std::get_if<Box>(&region)) return rand_init(*box, rng);
  const auto& polygon = std::get<Polygon>(region);
  const Box bounds = polygon.bounding_box();
  for (;;) {
    const Position p = rand_init(bounds, rng);
    if (polygon.contains(p)) return p;
  }
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Rand: return "rand";
    case Strategy::Sdp: return "sdp";
    case Strategy::Fp: return "fp";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "rand") return Strategy::Rand;
  if (name == "sdp") return Strategy::Sdp;
  if (name == "fp") return Strategy::Fp;
  throw std::invalid_argument(fmt::format("unknown strategy '{}' (expected rand, sdp or fp)", name));
}

LocalizeResult localize(Strategy strategy, const LocalizeConfig& config, const LocalizeInputs& inputs) {
  require_measurements(inputs.ul);
  LocalizeResult result;
  GridResult found;

  switch (strategy) {
    case Strategy::Rand: {
      if (!inputs.rng) throw std::invalid_argument("RAND strategy needs a random stream");
      result.initial_point = rand_init(config.bounds, *inputs.rng);
      result.region = clip_to_bounds(box_around(result.initial_point, config.rand_half_width), config.bounds);
      found = grid_search_mle({result.region, config.grid_resolution}, inputs.ul, inputs.beta);
      break;
    }
    case Strategy::Sdp: {
      SdpOptions options;
      options.region_of_interest = config.bounds;
      const SdpSolution sdp = solve_sdp_init(inputs.ul, inputs.beta, options);
      // An estimate outside the environment is pulled back in so the box stays
      // the configured size where possible.
      result.initial_point = config.bounds.clamp(sdp.x);
      result.region = clip_to_bounds(box_around(result.initial_point, config.sdp_half_width), config.bounds);
      found = grid_search_mle({result.region, config.grid_resolution}, inputs.ul, inputs.beta);
      break;
    }
    case Strategy::Fp: {
      if (!inputs.map || !inputs.dl) throw std::invalid_argument("FP strategy needs a map and DL RSS");
      const Label label = knn_match(*inputs.map, *inputs.dl, config.knn_k);
      SearchRegion region = init_region(label, config.fp_position_range);
      if (const auto* box = std::get_if<Box>(&region)) {
        result.initial_point = std::get<PositionLabel>(label).position;
        region = clip_to_bounds(*box, config.bounds);
      } else {
        const Box b = std::get<Polygon>(region).bounding_box();
        result.initial_point = {(b.min.x + b.max.x) / 2.0, (b.min.y + b.max.y) / 2.0};
      }
      result.region = region;
      found = grid_search_fp({result.region, config.grid_resolution}, inputs.ul, inputs.beta,
                             *inputs.dl, *inputs.map, config.fused_weight);
      break;
    }
  }

  result.estimate = found.theta.x;
  result.p0 = found.theta.p0;
  result.cost = found.cost;
  return result;
}

}  // namespace rssloc
