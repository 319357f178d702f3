#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rssloc/channel.hpp"
#include "rssloc/estimators.hpp"
#include "rssloc/fingerprint.hpp"
#include "rssloc/metrics.hpp"

namespace rssloc {

inline constexpr int kScenarioSchemaVersion = 1;

struct BaseStation {
  std::string id;
  Position position;
  PathLossModel model;  ///< downlink channel
};

/// A fingerprint collection point and the label stored with it.
struct FingerprintSite {
  Position position;
  Label label;
};

struct InitHalfWidths {
  double rand = 15.0;
  double sdp = 15.0;
  double fp = 15.0;  ///< only used for position labels; category labels carry a polygon
};

struct Scenario {
  std::string name;
  Box bounds;
  std::vector<Position> receivers;
  std::vector<BaseStation> base_stations;
  /// Uplink channel. Its p0 is the simulated truth; estimators never see it.
  PathLossModel ul_model;
  std::vector<Position> targets;
  /// When set, targets are this many distinct fingerprint sites drawn with the seed.
  std::optional<std::size_t> random_target_count;
  std::size_t trials_per_target = 1;
  std::vector<FingerprintSite> fingerprint_grid;
  std::size_t fingerprint_draws = 100;
  std::size_t knn_k = 1;
  double fused_weight = 0.01;
  double grid_resolution = 1.0;
  InitHalfWidths half_widths;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
  LocalizeConfig localize_config() const;
};

/// Purposes for the seed-derived random streams.
enum class StreamTag : std::uint64_t {
  Measurement = 1,
  RandomInit = 2,
  FingerprintMap = 3,
  TargetDraw = 4,
  PoorGeometry = 5,
};

RandomStream scenario_stream(const Scenario& s, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0);

/// Parses and validates a scenario document. Throws std::invalid_argument with a
/// JSON-path style message on schema violations.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);

/// Copy with a different seed; seed-drawn targets are redrawn.
Scenario with_seed(Scenario s, std::uint64_t seed);

/// Square lattice of the given spacing covering the box, corners included.
std::vector<Position> lattice_over(const Box& bounds, double spacing);

struct MeasurementSet {
  std::uint64_t trial_id = 0;
  std::size_t target_index = 0;
  Position truth;
  std::vector<UlMeasurement> ul;  ///< one per receiver, in receiver order
  RssVector dl;                   ///< one per base station
};

/// Averages draws_per_point downlink samples per (site, base station).
FingerprintMap build_fingerprint_from_scenario(const Scenario& s, std::size_t draws_per_point,
                                               RandomStream& rng);

/// Independent uplink and downlink draws at the target.
MeasurementSet generate_trial(const Scenario& s, std::size_t target_index, std::uint64_t trial_id,
                              RandomStream& rng);

/// The stream generate_trial uses inside run_experiment; shared by all strategies.
RandomStream trial_stream(const Scenario& s, std::size_t target_index, std::uint64_t trial_id);

struct RunOptions {
  unsigned jobs = 1;  ///< worker threads; 0 = hardware concurrency
};

/// Localizes every (target, trial, strategy). Per-trial failures are recorded,
/// not thrown. Throws std::invalid_argument if Fp is requested without a map.
EstimateReport run_experiment(const Scenario& s, const std::set<Strategy>& strategies,
                              const FingerprintMap* map = nullptr, const RunOptions& options = {});

/// Receivers moved to uniform positions in the disk (clipped to the bounds).
Scenario make_poor_geometry(const Scenario& s, double radius, const Position& center);

}  // namespace rssloc
