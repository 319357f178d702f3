#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rssloc/fingerprint.hpp"
#include "rssloc/metrics.hpp"

namespace rssloc::io {

inline constexpr int kSummarySchemaVersion = 1;

inline constexpr const char* kFingerprintHeader = "x,y,label_kind,label_value,bs_id,rss_dbm";
inline constexpr const char* kResultsHeader = "strategy,trial_id,truth_x,truth_y,est_x,est_y,error_m,failed";
inline constexpr const char* kSummaryHeader = "strategy,rmse_m,p80_m,n_trials,n_failed,fcc_pass";
inline constexpr const char* kCdfHeader = "error_m,fraction";
inline constexpr const char* kCompareHeader = "scenario,strategy,rmse_m,p80_m,fcc_pass";

/// Thrown for malformed input files; the message names the file and line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes through a temporary file and renames, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Category polygons live next to the CSV: map.csv -> map.polygons.json.
std::filesystem::path polygon_sidecar_path(const std::filesystem::path& csv);

// Fingerprint map: one row per (position, base station). Position labels carry
// "x;y" in label_value; category labels carry the name, with the polygon in the sidecar.
std::string fingerprint_csv(const FingerprintMap& map);
void write_fingerprint_map(const FingerprintMap& map, const std::filesystem::path& csv);
FingerprintMap read_fingerprint_map(const std::filesystem::path& csv);

std::string results_csv(const EstimateReport& report);
std::vector<TrialRecord> read_results(const std::filesystem::path& path);

/// Summary CSV preceded by one metadata comment: "# schema_version=1,scenario=<name>".
struct SummaryFile {
  int schema_version = kSummarySchemaVersion;
  std::string scenario;
  std::vector<StrategySummary> rows;  ///< cdf left empty
};
std::string summary_csv(const EstimateReport& report);
SummaryFile read_summary(const std::filesystem::path& path);

std::string cdf_csv(const StrategySummary& summary);
std::vector<std::pair<double, double>> read_cdf(const std::filesystem::path& path);

}  // namespace rssloc::io
