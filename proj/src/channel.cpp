#include "rssloc/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rssloc {

void PathLossModel::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("path-loss exponent must be positive");
  if (!(sigma_db >= 0.0) || !std::isfinite(sigma_db))
    throw std::invalid_argument("shadowing deviation must be non-negative");
  if (d0 != 1.0) throw std::invalid_argument("reference distance is fixed at 1 m");
  if (!std::isfinite(p0)) throw std::invalid_argument("reference power must be finite");
}

RandomStream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * ids.size());
  const auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto id : ids) push(id);
  std::seed_seq seq(words.begin(), words.end());
  return RandomStream(seq);
}

double clamped_distance(const Position& a, const Position& b) {
  return std::max(distance(a, b), kMinDistance);
}

double expected_rss_at_distance(const PathLossModel& model, double d) {
  d = std::max(d, kMinDistance);
  return model.p0 - 10.0 * model.beta * std::log10(d / model.d0);
}

double expected_rss(const PathLossModel& model, const Position& tx, const Position& rx) {
  return expected_rss_at_distance(model, distance(tx, rx));
}

RssSample sample_rss(const PathLossModel& model, const Position& tx, const Position& rx,
                     RandomStream& rng, Link link, std::string source_id) {
  double value = expected_rss(model, tx, rx);
  // sigma 0 must not consume a draw or perturb the value.
  if (model.sigma_db > 0.0) {
    std::normal_distribution<double> shadowing(0.0, model.sigma_db);
    value += shadowing(rng);
  }
  return {value, link, std::move(source_id)};
}

}  // namespace rssloc
