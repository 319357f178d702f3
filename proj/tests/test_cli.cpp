#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "rssloc/cli.hpp"
#include "rssloc/io.hpp"
#include "rssloc/scenario.hpp"

using namespace rssloc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("rssloc-cli-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string shipped(const char* name) { return std::string(RSSLOC_SOURCE_DIR) + "/scenarios/" + name; }

// Shipped scenario with fewer trials (and optionally edits) written to the temp dir.
std::string variant(const TempDir& dir, const char* name, std::size_t trials,
                    void (*edit)(nlohmann::json&) = nullptr) {
  auto doc = scenario_to_json(load_scenario(shipped(name)));
  doc["trials_per_target"] = trials;
  if (edit) edit(doc);
  const auto path = dir / (std::string("v-") + name);
  std::ofstream(path) << doc.dump(2);
  return path;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("build-map writes one entry per site") {
  TempDir dir;
  const auto r = invoke({"build-map", "--scenario", shipped("indoor.json"), "--out", dir / "map.csv"});
  REQUIRE(r.code == cli::kOk);
  const auto map = io::read_fingerprint_map(dir / "map.csv");
  CHECK(map.size() == 13);
  CHECK(map.base_station_ids().size() == 3);
}

TEST_CASE("build-map without shadowing stores the expected powers") {
  TempDir dir;
  const auto path = variant(dir, "indoor.json", 1, [](nlohmann::json& d) {
    for (auto& bs : d["base_stations"]) bs["model"]["sigma_db"] = 0.0;
  });
  REQUIRE(invoke({"build-map", "--scenario", path, "--out", dir / "map.csv", "--draws", "3"}).code == cli::kOk);
  const auto s = load_scenario(path);
  const auto map = io::read_fingerprint_map(dir / "map.csv");
  for (const auto& e : map.entries())
    for (const auto& bs : s.base_stations)
      CHECK(e.rss.at(bs.id) == doctest::Approx(expected_rss(bs.model, bs.position, e.position)).epsilon(1e-12));
}

TEST_CASE("build-map configuration errors") {
  TempDir dir;
  const auto path = variant(dir, "indoor.json", 1, [](nlohmann::json& d) { d.erase("fingerprint_grid"); });
  const auto r = invoke({"build-map", "--scenario", path, "--out", dir / "map.csv"});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("fingerprint_grid") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "map.csv"));

  CHECK(invoke({"build-map", "--scenario", dir / "nope.json", "--out", dir / "m.csv"}).code == cli::kConfigError);
  CHECK(invoke({"build-map", "--scenario", shipped("indoor.json")}).code == cli::kConfigError);
  CHECK(invoke({"frobnicate"}).code == cli::kConfigError);
}

TEST_CASE("run writes results, summary and cdfs") {
  TempDir dir;
  const auto scenario = variant(dir, "indoor.json", 4);
  REQUIRE(invoke({"build-map", "--scenario", scenario, "--out", dir / "map.csv"}).code == cli::kOk);
  const auto r = invoke({"run", "--scenario", scenario, "--out", dir / "out", "--map", dir / "map.csv"});
  REQUIRE(r.code == cli::kOk);
  const auto summary = io::read_summary(dir.path / "out" / "summary.csv");
  CHECK(summary.rows.size() == 3);
  CHECK(summary.scenario == "indoor");
  CHECK(io::read_results(dir.path / "out" / "results.csv").size() == 3 * 13 * 4);
  for (const char* s : {"rand", "sdp", "fp"}) {
    const auto cdf = io::read_cdf(dir.path / "out" / (std::string("cdf_") + s + ".csv"));
    CHECK(cdf.size() == 13 * 4);
    CHECK(cdf.back().second == 1.0);
  }
}

TEST_CASE("run is byte-identical for a seed and any worker count") {
  TempDir dir;
  const auto scenario = variant(dir, "urban.json", 3);
  REQUIRE(invoke({"build-map", "--scenario", scenario, "--out", dir / "map.csv"}).code == cli::kOk);
  const std::vector<std::string> base{"run", "--scenario", scenario, "--map", dir / "map.csv", "--seed", "7"};
  auto a = base, b = base, c = base;
  a.insert(a.end(), {"--out", dir / "a"});
  b.insert(b.end(), {"--out", dir / "b"});
  c.insert(c.end(), {"--out", dir / "c", "--jobs", "4"});
  REQUIRE(invoke(a).code == cli::kOk);
  REQUIRE(invoke(b).code == cli::kOk);
  REQUIRE(invoke(c).code == cli::kOk);
  for (const char* f : {"results.csv", "summary.csv", "cdf_fp.csv"}) {
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "c" / f));
  }

  auto d = base;
  d[d.size() - 1] = "8";
  d.insert(d.end(), {"--out", dir / "d"});
  REQUIRE(invoke(d).code == cli::kOk);
  CHECK(slurp(dir.path / "a" / "results.csv") != slurp(dir.path / "d" / "results.csv"));
}

TEST_CASE("run configuration errors") {
  TempDir dir;
  const auto scenario = variant(dir, "indoor.json", 2);
  auto r = invoke({"run", "--scenario", scenario, "--out", dir / "out"});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("--map") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "out"));

  CHECK(invoke({"run", "--scenario", scenario, "--out", dir / "out", "--strategies", "rand,mle"}).code ==
        cli::kConfigError);
  CHECK(invoke({"run", "--scenario", scenario, "--out", dir / "out", "--strategies", "rand", "--grid-res", "0"}).code ==
        cli::kConfigError);
  CHECK(invoke({"run", "--scenario", scenario, "--out", dir / "out", "--map", dir / "missing.csv"}).code ==
        cli::kConfigError);
}

TEST_CASE("run with a subset of strategies and poor geometry") {
  TempDir dir;
  const auto scenario = variant(dir, "indoor.json", 2);
  const auto r = invoke({"run", "--scenario", scenario, "--out", dir / "out", "--strategies", "sdp,rand",
                      "--poor-geometry", "5"});
  REQUIRE(r.code == cli::kOk);
  const auto summary = io::read_summary(dir.path / "out" / "summary.csv");
  CHECK(summary.rows.size() == 2);
  CHECK(summary.scenario == "indoor-poor");
  CHECK_FALSE(fs::exists(dir.path / "out" / "cdf_fp.csv"));
}

TEST_CASE("compare merges summaries") {
  TempDir dir;
  std::vector<std::string> summaries;
  for (const char* name : {"indoor.json", "open_space.json", "urban.json"}) {
    const auto scenario = variant(dir, name, 1);
    const auto stem = std::string(name).substr(0, std::string(name).find('.'));
    REQUIRE(invoke({"build-map", "--scenario", scenario, "--out", dir / (stem + ".csv")}).code == cli::kOk);
    REQUIRE(invoke({"run", "--scenario", scenario, "--out", dir / stem, "--map", dir / (stem + ".csv")}).code ==
            cli::kOk);
    summaries.push_back((dir.path / stem / "summary.csv").string());
  }

  auto args = std::vector<std::string>{"compare"};
  args.insert(args.end(), summaries.begin(), summaries.end());
  args.insert(args.end(), {"--out", dir / "all.csv"});
  const auto r = invoke(args);
  REQUIRE(r.code == cli::kOk);
  const auto merged = slurp(dir / "all.csv");
  CHECK(merged.rfind(std::string(io::kCompareHeader) + "\n", 0) == 0);
  CHECK(count_lines(merged) == 1 + 9);

  const auto single = invoke({"compare", summaries[0], "--out", dir / "one.csv"});
  REQUIRE(single.code == cli::kOk);
  const auto one = io::read_summary(summaries[0]);
  const auto text = slurp(dir / "one.csv");
  CHECK(count_lines(text) == 1 + 3);
  // each summary row reappears behind the scenario name
  std::istringstream lines(slurp(summaries[0]));
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  std::size_t echoed = 0;
  while (std::getline(lines, line)) {
    const auto f = line.find(',', line.find(',', line.find(',') + 1) + 1);  // strategy,rmse,p80
    const auto fcc = line.substr(line.rfind(',') + 1);
    CHECK(text.find(one.scenario + "," + line.substr(0, f) + "," + fcc + "\n") != std::string::npos);
    ++echoed;
  }
  CHECK(echoed == one.rows.size());
}

TEST_CASE("compare rejects mixed schema versions") {
  TempDir dir;
  const std::string rows = std::string(io::kSummaryHeader) + "\nrand,1.0,1.0,1,0,true\n";
  std::ofstream(dir / "v1.csv") << "# schema_version=1,scenario=a\n" << rows;
  std::ofstream(dir / "v2.csv") << "# schema_version=2,scenario=b\n" << rows;
  const auto r = invoke({"compare", dir / "v1.csv", dir / "v2.csv"});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("schema_version") != std::string::npos);
  CHECK(invoke({"compare", dir / "v2.csv"}).code == cli::kConfigError);
  CHECK(invoke({"compare", dir / "absent.csv"}).code == cli::kConfigError);
}
