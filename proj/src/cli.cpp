#include "rssloc/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rssloc/io.hpp"
#include "rssloc/scenario.hpp"

namespace rssloc::cli {

namespace fs = std::filesystem;

namespace {

/// Bad inputs detected before any work starts.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("RSSLOC_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw ConfigError(fmt::format("RSSLOC_SEED is not an integer: '{}'", raw));
  return v;
}

Scenario load(const std::string& path, std::optional<std::uint64_t> seed) {
  Scenario s;
  try {
    s = load_scenario(path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!seed) seed = env_seed();
  if (seed) s = with_seed(std::move(s), *seed);
  return s;
}

std::set<Strategy> parse_strategies(const std::string& list) {
  std::set<Strategy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.insert(parse_strategy(item));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

struct BuildMapArgs {
  std::string scenario;
  std::string out;
  std::optional<std::size_t> draws;
  std::optional<std::uint64_t> seed;
};

int cmd_build_map(const BuildMapArgs& a, std::ostream& out) {
  const Scenario s = load(a.scenario, a.seed);
  if (s.fingerprint_grid.empty()) throw ConfigError(fmt::format("scenario '{}' has no fingerprint_grid", s.name));
  if (s.base_stations.empty()) throw ConfigError(fmt::format("scenario '{}' has no base_stations", s.name));
  const std::size_t draws = a.draws.value_or(s.fingerprint_draws);
  if (draws < 1) throw ConfigError("--draws must be at least 1");

  auto rng = scenario_stream(s, StreamTag::FingerprintMap);
  const FingerprintMap map = build_fingerprint_from_scenario(s, draws, rng);
  io::write_fingerprint_map(map, a.out);
  out << fmt::format("wrote {} fingerprint entries ({} base stations) to {}\n", map.size(),
                     map.base_station_ids().size(), a.out);
  return kOk;
}

struct RunArgs {
  std::string scenario;
  std::string out;
  std::string strategies = "rand,sdp,fp";
  std::optional<std::string> map;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::optional<double> grid_res;
  std::optional<double> poor_geometry;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  Scenario s = load(a.scenario, a.seed);
  const auto strategies = parse_strategies(a.strategies);
  if (a.grid_res) {
    if (!(*a.grid_res > 0.0)) throw ConfigError("--grid-res must be positive");
    s.grid_resolution = *a.grid_res;
  }
  if (a.poor_geometry) {
    const double r = *a.poor_geometry;
    if (!(r > 0.0)) throw ConfigError("--poor-geometry radius must be positive");
    s = make_poor_geometry(s, r, {s.bounds.min.x + r, s.bounds.max.y - r});
  }

  std::optional<FingerprintMap> map;
  if (strategies.contains(Strategy::Fp)) {
    if (!a.map) throw ConfigError("strategy 'fp' needs a fingerprint map (--map FILE)");
    try {
      map = io::read_fingerprint_map(*a.map);
    } catch (const io::FormatError& e) {
      throw ConfigError(e.what());
    }
    if (s.knn_k > map->size())
      throw ConfigError(fmt::format("knn_k = {} exceeds {} map entries", s.knn_k, map->size()));
  }

  const EstimateReport report = run_experiment(s, strategies, map ? &*map : nullptr, RunOptions{a.jobs});

  // Everything is computed before the first file is written.
  const fs::path dir = a.out;
  io::write_file_atomic(dir / "results.csv", io::results_csv(report));
  io::write_file_atomic(dir / "summary.csv", io::summary_csv(report));
  for (const auto& sum : report.summaries)
    io::write_file_atomic(dir / fmt::format("cdf_{}.csv", strategy_name(sum.strategy)), io::cdf_csv(sum));

  out << fmt::format("scenario {} (seed {}): {} targets x {} trials\n", s.name, s.seed, s.targets.size(),
                     s.trials_per_target);
  for (const auto& sum : report.summaries) {
    out << fmt::format("  {:<5} rmse {:8.2f} m  p80 {:8.2f} m  fcc {}  failed {}\n", strategy_name(sum.strategy),
                       sum.rmse, sum.p80, sum.fcc_pass ? "pass" : "fail", sum.n_failed);
  }
  return kOk;
}

struct CompareArgs {
  std::vector<std::string> summaries;
  std::optional<std::string> out;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  std::vector<io::SummaryFile> files;
  for (const auto& path : a.summaries) {
    try {
      files.push_back(io::read_summary(path));
    } catch (const io::FormatError& e) {
      throw ConfigError(e.what());
    }
    if (files.back().schema_version != files.front().schema_version)
      throw ConfigError(fmt::format("{}: schema_version {} does not match {} in {}", path,
                                    files.back().schema_version, files.front().schema_version, a.summaries.front()));
    if (files.back().schema_version != io::kSummarySchemaVersion)
      throw ConfigError(fmt::format("{}: unsupported schema_version {}", path, files.back().schema_version));
  }

  std::string csv = std::string(io::kCompareHeader) + "\n";
  out << fmt::format("{:<20} {:<6} {:>10} {:>10}  {}\n", "scenario", "method", "rmse_m", "p80_m", "fcc");
  for (const auto& f : files) {
    for (const auto& row : f.rows) {
      csv += fmt::format("{},{},{:.6f},{:.6f},{}\n", f.scenario, strategy_name(row.strategy), row.rmse, row.p80,
                         row.fcc_pass ? "true" : "false");
      out << fmt::format("{:<20} {:<6} {:>10.2f} {:>10.2f}  {}\n", f.scenario, strategy_name(row.strategy),
                         row.rmse, row.p80, row.fcc_pass ? "pass" : "fail");
    }
  }
  if (a.out) io::write_file_atomic(*a.out, csv);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RSS target localization experiments"};
  app.require_subcommand(1);

  BuildMapArgs build;
  auto* build_cmd = app.add_subcommand("build-map", "Simulate and average the offline fingerprint map");
  build_cmd->add_option("--scenario", build.scenario, "Scenario JSON")->required();
  build_cmd->add_option("--out", build.out, "Output fingerprint CSV")->required();
  build_cmd->add_option("--draws", build.draws, "Samples averaged per site and base station");
  build_cmd->add_option("--seed", build.seed, "Random seed");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run the Monte Carlo localization experiment");
  run_cmd->add_option("--scenario", run_args.scenario, "Scenario JSON")->required();
  run_cmd->add_option("--out", run_args.out, "Output directory")->required();
  run_cmd->add_option("--strategies", run_args.strategies, "Comma-separated subset of rand,sdp,fp");
  run_cmd->add_option("--map", run_args.map, "Fingerprint CSV (required for fp)");
  run_cmd->add_option("--seed", run_args.seed, "Random seed");
  run_cmd->add_option("--jobs", run_args.jobs, "Worker threads (0 = all cores)");
  run_cmd->add_option("--grid-res", run_args.grid_res, "Grid resolution in meters");
  run_cmd->add_option("--poor-geometry", run_args.poor_geometry,
                      "Cluster receivers within this radius at the upper-left corner");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Merge summary CSVs into one table");
  compare_cmd->add_option("summaries", compare.summaries, "Summary CSV files")->required();
  compare_cmd->add_option("--out", compare.out, "Write the merged table as CSV");

  std::vector<const char*> argv{"rssloc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (build_cmd->parsed()) return cmd_build_map(build, out);
    if (run_cmd->parsed()) return cmd_run(run_args, out);
    if (compare_cmd->parsed()) return cmd_compare(compare, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace rssloc::cli
