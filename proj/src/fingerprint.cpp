#include "rssloc/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace rssloc {

bool label_less(const Label& a, const Label& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (const auto* pa = std::get_if<PositionLabel>(&a))
    return pa->position < std::get<PositionLabel>(b).position;
  return std::get<CategoryLabel>(a).name < std::get<CategoryLabel>(b).name;
}

bool label_equal(const Label& a, const Label& b) { return !label_less(a, b) && !label_less(b, a); }

std::string label_to_string(const Label& label) {
  if (const auto* p = std::get_if<PositionLabel>(&label))
    return fmt::format("({:g}, {:g})", p->position.x, p->position.y);
  return std::get<CategoryLabel>(label).name;
}

FingerprintMap::FingerprintMap(std::vector<FingerprintEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("fingerprint map needs at least one entry");
  std::set<std::string> ids;
  for (const auto& e : entries_) {
    if (!std::isfinite(e.position.x) || !std::isfinite(e.position.y))
      throw std::invalid_argument("fingerprint entry position is not finite");
    if (e.rss.empty()) throw std::invalid_argument("fingerprint entry has no rss values");
    for (const auto& [id, value] : e.rss) {
      if (!std::isfinite(value)) throw std::invalid_argument("fingerprint rss is not finite");
      ids.insert(id);
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a.position < b.position; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].position == entries_[i - 1].position)
      throw std::invalid_argument(fmt::format("duplicate fingerprint position ({}, {})",
                                              entries_[i].position.x, entries_[i].position.y));
  }
  base_station_ids_.assign(ids.begin(), ids.end());
}

FingerprintMap build_map(const std::vector<RawObservation>& observations) {
  if (observations.empty()) throw std::invalid_argument("no fingerprint observations");

  struct Accumulator {
    Label label;
    std::map<std::string, std::pair<double, std::size_t>> sums;
  };
  std::map<Position, Accumulator> by_position;
  for (const auto& obs : observations) {
    auto [it, inserted] = by_position.try_emplace(obs.position, Accumulator{obs.label, {}});
    if (!inserted && !label_equal(it->second.label, obs.label))
      throw std::invalid_argument(fmt::format("conflicting labels at ({}, {})", obs.position.x,
                                              obs.position.y));
    auto& [sum, count] = it->second.sums[obs.base_station_id];
    sum += obs.rss_dbm;
    ++count;
  }

  std::vector<FingerprintEntry> entries;
  entries.reserve(by_position.size());
  for (auto& [position, acc] : by_position) {
    FingerprintEntry entry{position, std::move(acc.label), {}};
    for (const auto& [id, sc] : acc.sums) entry.rss[id] = sc.first / static_cast<double>(sc.second);
    entries.push_back(std::move(entry));
  }
  return FingerprintMap(std::move(entries));
}

double mse_distance(const RssVector& query, const RssVector& entry) {
  double sum = 0.0;
  std::size_t shared = 0;
  auto q = query.begin();
  auto e = entry.begin();
  while (q != query.end() && e != entry.end()) {
    if (q->first < e->first) {
      ++q;
    } else if (e->first < q->first) {
      ++e;
    } else {
      const double diff = q->second - e->second;
      sum += diff * diff;
      ++shared;
      ++q;
      ++e;
    }
  }
  if (shared == 0) throw std::invalid_argument("query and fingerprint share no base station");
  return sum / static_cast<double>(shared);
}

Label knn_match(const FingerprintMap& map, const RssVector& query, std::size_t k) {
  const auto& entries = map.entries();
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (k > entries.size())
    throw std::invalid_argument(fmt::format("k = {} exceeds {} map entries", k, entries.size()));

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    ranked.emplace_back(mse_distance(query, entries[i].rss), i);
  // Entries are position-sorted, so the index breaks equal-MSE ties by position.
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());

  struct Vote {
    const Label* label;
    std::size_t count;
    double mse_sum;
  };
  std::vector<Vote> votes;
  for (std::size_t n = 0; n < k; ++n) {
    const auto& [mse, idx] = ranked[n];
    const Label& label = entries[idx].label;
    auto it = std::find_if(votes.begin(), votes.end(),
                           [&](const Vote& v) { return label_equal(*v.label, label); });
    if (it == votes.end()) {
      votes.push_back({&label, 1, mse});
    } else {
      ++it->count;
      it->mse_sum += mse;
    }
  }

  const auto better = [](const Vote& a, const Vote& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.mse_sum != b.mse_sum) return a.mse_sum < b.mse_sum;
    return label_less(*a.label, *b.label);
  };
  return *std::min_element(votes.begin(), votes.end(), better)->label;
}

SearchRegion init_region(const Label& label, double position_range) {
  if (const auto* p = std::get_if<PositionLabel>(&label)) {
    if (!(position_range > 0.0)) throw std::invalid_argument("position range must be positive");
    return box_around(p->position, position_range);
  }
  return std::get<CategoryLabel>(label).region;
}

const RssVector& map_rss_at(const FingerprintMap& map, const Position& x) {
  const auto& entries = map.entries();
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double dx = entries[i].position.x - x.x;
    const double dy = entries[i].position.y - x.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return entries[best].rss;
}

}  // namespace rssloc
