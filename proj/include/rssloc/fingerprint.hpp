#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "rssloc/geometry.hpp"

namespace rssloc {

/// Downlink RSS keyed by base-station id (dBm).
using RssVector = std::map<std::string, double>;

struct PositionLabel {
  Position position;
  friend bool operator==(const PositionLabel&, const PositionLabel&) = default;
};

/// Named area (e.g. a building) with the polygon searched when it wins the vote.
struct CategoryLabel {
  std::string name;
  Polygon region;
  friend bool operator==(const CategoryLabel& a, const CategoryLabel& b) { return a.name == b.name; }
};

using Label = std::variant<PositionLabel, CategoryLabel>;

/// Total order used for deterministic tie-breaking: position labels first (x, then y),
/// then category labels by name.
bool label_less(const Label& a, const Label& b);
bool label_equal(const Label& a, const Label& b);
std::string label_to_string(const Label& label);

struct FingerprintEntry {
  Position position;
  Label label;
  RssVector rss;
};

/// Immutable offline database. Entries are kept sorted by position.
class FingerprintMap {
 public:
  /// Throws std::invalid_argument on empty input, an empty rss vector, non-finite
  /// values, or two entries at the same position.
  explicit FingerprintMap(std::vector<FingerprintEntry> entries);

  const std::vector<FingerprintEntry>& entries() const { return entries_; }
  const std::vector<std::string>& base_station_ids() const { return base_station_ids_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<FingerprintEntry> entries_;
  std::vector<std::string> base_station_ids_;
};

struct RawObservation {
  Position position;
  Label label;
  std::string base_station_id;
  double rss_dbm = 0.0;
};

/// Averages raw observations per (position, base station); one entry per position.
FingerprintMap build_map(const std::vector<RawObservation>& observations);

/// Mean squared dB difference over the base stations both vectors carry.
/// Throws std::invalid_argument when they share none.
double mse_distance(const RssVector& query, const RssVector& entry);

/// Plurality label of the k entries with smallest MSE. Vote ties go to the label
/// with the smallest summed MSE, then to label_less order.
Label knn_match(const FingerprintMap& map, const RssVector& query, std::size_t k);

/// Search area implied by a matched label: a square of the given half-width around
/// a position label, or the stored polygon of a category label.
SearchRegion init_region(const Label& label, double position_range);

/// Stored vector of the entry nearest to x; equidistant entries resolve to the
/// lexicographically smallest position.
const RssVector& map_rss_at(const FingerprintMap& map, const Position& x);

}  // namespace rssloc
