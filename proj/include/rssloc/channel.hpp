#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

#include "rssloc/geometry.hpp"

namespace rssloc {

/// Ranges below this are clamped; the log-distance model is undefined at d = 0.
inline constexpr double kMinDistance = 0.1;

/// Log-distance path loss with log-normal shadowing:
///   P(d) = p0 - 10 * beta * log10(d / d0) + n,  n ~ N(0, sigma_db^2)
struct PathLossModel {
  double p0 = -30.0;     ///< dBm at the reference distance
  double beta = 3.0;     ///< path-loss exponent
  double sigma_db = 0.0; ///< shadowing standard deviation in dB
  double d0 = 1.0;       ///< reference distance, meters

  /// Throws std::invalid_argument on beta <= 0, sigma_db < 0, or d0 != 1.
  void validate() const;
};

enum class Link { Uplink, Downlink };

struct RssSample {
  double value = 0.0;  ///< dBm
  Link link = Link::Uplink;
  std::string source_id;
};

/// Explicit random stream. Never global.
using RandomStream = std::mt19937_64;

/// Stream keyed by a base seed and a path of ids (target, trial, purpose ...).
/// Equal keys give equal streams; seeding goes through std::seed_seq.
RandomStream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

/// max(distance(a, b), kMinDistance)
double clamped_distance(const Position& a, const Position& b);

double expected_rss(const PathLossModel& model, const Position& tx, const Position& rx);
double expected_rss_at_distance(const PathLossModel& model, double d);

RssSample sample_rss(const PathLossModel& model, const Position& tx, const Position& rx,
                     RandomStream& rng, Link link = Link::Uplink, std::string source_id = {});

}  // namespace rssloc
