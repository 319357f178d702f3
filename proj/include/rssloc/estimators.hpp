#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "rssloc/channel.hpp"
#include "rssloc/fingerprint.hpp"
#include "rssloc/geometry.hpp"

namespace rssloc {

/// Uplink RSS reported by one receiver.
struct UlMeasurement {
  Position receiver;
  double rss_dbm = 0.0;
};

using UlMeasurements = std::span<const UlMeasurement>;

/// Unknowns of the uplink problem: target position and its reference power.
struct UnknownVector {
  Position x;
  double p0 = 0.0;
};

/// Sum over receivers of (P_i - p0 + 10 beta log10 d_i)^2, d_i clamped.
double mle_cost(const UnknownVector& theta, UlMeasurements measurements, double beta);

/// The p0 that minimizes mle_cost at a fixed position: mean of P_i + 10 beta log10 d_i.
double closed_form_p0(const Position& x, UlMeasurements measurements, double beta);

/// mle_cost plus w * sum over shared base stations of (P_DL - P_map(x))^2, where
/// P_map(x) is the stored vector of the map entry nearest to x.
double fp_mle_cost(const UnknownVector& theta, UlMeasurements measurements, double beta,
                   const RssVector& dl_rss, const FingerprintMap& map, double w);

struct GridSpec {
  SearchRegion region;
  double resolution = 1.0;
};

struct GridResult {
  UnknownVector theta;
  double cost = 0.0;
  std::size_t points_evaluated = 0;
};

/// Exhaustive search over lattice points of the region; p0 is eliminated in closed
/// form at every point. Ties go to the lexicographically smallest position.
/// Throws std::invalid_argument when the grid has no points.
GridResult grid_search_mle(const GridSpec& grid, UlMeasurements measurements, double beta);

/// Same search minimizing fp_mle_cost.
GridResult grid_search_fp(const GridSpec& grid, UlMeasurements measurements, double beta,
                          const RssVector& dl_rss, const FingerprintMap& map, double w);

/// Uniform draw over the box.
Position rand_init(const Box& bounds, RandomStream& rng);
/// Uniform draw over a box or polygon (rejection inside the polygon's bounding box).
Position rand_init(const SearchRegion& region, RandomStream& rng);

enum class Strategy { Rand, Sdp, Fp };

std::string_view strategy_name(Strategy s);
/// Accepts "rand", "sdp", "fp". Throws std::invalid_argument otherwise.
Strategy parse_strategy(std::string_view name);

struct LocalizeConfig {
  Box bounds;                   ///< environment extent; every box search is clipped to it
  double grid_resolution = 1.0;
  double rand_half_width = 15.0;
  double sdp_half_width = 15.0;
  double fp_position_range = 15.0;  ///< half-width around a matched position label
  std::size_t knn_k = 1;
  double fused_weight = 0.01;
};

struct LocalizeInputs {
  UlMeasurements ul;
  double beta = 3.0;
  const RssVector* dl = nullptr;          ///< required for Fp
  const FingerprintMap* map = nullptr;    ///< required for Fp
  RandomStream* rng = nullptr;            ///< required for Rand
};

struct LocalizeResult {
  Position estimate;
  double p0 = 0.0;
  double cost = 0.0;
  Position initial_point;  ///< seed point of the search (label position or polygon centroid for Fp)
  SearchRegion region;
};

/// RAND: box around a uniform draw. SDP: box around the relaxation's position,
/// recentred inside the bounds. FP: kNN label -> region, fused objective.
LocalizeResult localize(Strategy strategy, const LocalizeConfig& config,
                        const LocalizeInputs& inputs);

}  // namespace rssloc
