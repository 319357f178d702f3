#include "rssloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace rssloc {

namespace {

void require_non_empty(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("error list is empty");
}

std::vector<double> sorted_copy(std::span<const double> errors) {
  std::vector<double> v(errors.begin(), errors.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double rmse(std::span<const double> errors) {
  require_non_empty(errors);
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

double percentile(std::span<const double> errors, double q) {
  require_non_empty(errors);
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile fraction must be in (0, 1]");
  const auto sorted = sorted_copy(errors);
  const auto n = static_cast<double>(sorted.size());
  // ceil(q*N) computed with a small guard so 0.8 * 10 does not round up to 9.
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<std::pair<double, double>> cdf_points(std::span<const double> errors) {
  require_non_empty(errors);
  const auto sorted = sorted_copy(errors);
  std::vector<std::pair<double, double>> points;
  points.reserve(sorted.size());
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double frac = (i + 1 == sorted.size()) ? 1.0 : static_cast<double>(i + 1) / n;
    points.emplace_back(sorted[i], frac);
  }
  return points;
}

bool fcc_horizontal_check(std::span<const double> errors) {
  return percentile(errors, kFccFraction) <= kFccHorizontalLimit;
}

std::vector<StrategySummary> summarize(std::span<const TrialRecord> records) {
  std::map<Strategy, std::pair<std::vector<double>, std::size_t>> grouped;
  for (const auto& r : records) {
    auto& [errors, failed] = grouped[r.strategy];
    if (r.failed)
      ++failed;
    else
      errors.push_back(r.error);
  }

  std::vector<StrategySummary> out;
  for (auto& [strategy, data] : grouped) {
    auto& [errors, failed] = data;
    StrategySummary s;
    s.strategy = strategy;
    s.n_failed = failed;
    s.n_trials = errors.size();
    if (errors.empty()) {
      s.rmse = s.p80 = std::numeric_limits<double>::quiet_NaN();
    } else {
      // Sort first so the floating-point sums do not depend on completion order.
      std::sort(errors.begin(), errors.end());
      s.rmse = rmse(errors);
      s.p80 = percentile(errors, kFccFraction);
      s.fcc_pass = s.p80 <= kFccHorizontalLimit;
      s.cdf = cdf_points(errors);
    }
    out.push_back(std::move(s));
  }
  return out;
}

const StrategySummary* find_summary(const EstimateReport& report, Strategy s) {
  for (const auto& summary : report.summaries)
    if (summary.strategy == s) return &summary;
  return nullptr;
}

}  // namespace rssloc
