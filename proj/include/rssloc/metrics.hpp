#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rssloc/estimators.hpp"
#include "rssloc/geometry.hpp"

namespace rssloc {

/// FCC E911 horizontal requirement: 80% of errors within 50 m.
inline constexpr double kFccHorizontalLimit = 50.0;
inline constexpr double kFccFraction = 0.8;

// All of these throw std::invalid_argument on an empty list.
double rmse(std::span<const double> errors);
/// Nearest-rank percentile: sorted[ceil(q * N) - 1], q in (0, 1].
double percentile(std::span<const double> errors, double q);
/// Empirical CDF: (sorted error, i / N) for i = 1..N.
std::vector<std::pair<double, double>> cdf_points(std::span<const double> errors);
/// percentile(errors, 0.8) <= 50 m, inclusive.
bool fcc_horizontal_check(std::span<const double> errors);

struct TrialRecord {
  Strategy strategy = Strategy::Rand;
  std::uint64_t trial_id = 0;
  Position truth;
  Position estimate;
  double error = 0.0;
  bool failed = false;
  std::string failure;
};

struct StrategySummary {
  Strategy strategy = Strategy::Rand;
  double rmse = 0.0;
  double p80 = 0.0;
  std::size_t n_trials = 0;  ///< trials that produced an estimate
  std::size_t n_failed = 0;
  bool fcc_pass = false;
  std::vector<std::pair<double, double>> cdf;
};

struct EstimateReport {
  std::string scenario;
  std::vector<TrialRecord> records;  ///< ordered by (strategy, trial_id)
  std::vector<StrategySummary> summaries;  ///< one per strategy present, in enum order
};

/// Aggregates per strategy over non-failed trials. A strategy whose trials all
/// failed gets NaN rmse/p80 and fcc_pass = false.
std::vector<StrategySummary> summarize(std::span<const TrialRecord> records);

const StrategySummary* find_summary(const EstimateReport& report, Strategy s);

}  // namespace rssloc
