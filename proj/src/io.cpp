#include "rssloc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace rssloc::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw FormatError(fmt::format("{}: cannot open file", path.string()));
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      line = strip_cr(line);
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(fmt::format("{}:{}: {}", path_.string(), line_no_, what));
  }

  double number(const std::string& field, const char* name) const {
    // strtod accepts "nan", which failed trial rows use.
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
      fail(fmt::format("{} is not a number: '{}'", name, field));
    return v;
  }

  std::uint64_t integer(const std::string& field, const char* name) const {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
      fail(fmt::format("{} is not a non-negative integer: '{}'", name, field));
    return v;
  }

  bool boolean(const std::string& field, const char* name) const {
    if (field == "true") return true;
    if (field == "false") return false;
    fail(fmt::format("{} must be true or false: '{}'", name, field));
  }

  void expect_header(const char* header) {
    std::string line;
    if (!next(line)) fail("file is empty");
    if (line != header) fail(fmt::format("expected header '{}'", header));
  }

  int line_no() const { return line_no_; }

 private:
  fs::path path_;
  std::ifstream in_;
  int line_no_ = 0;
};

void check_field_text(const std::string& text, const char* what) {
  if (text.empty() || text.find_first_of(",\n\r") != std::string::npos)
    throw std::invalid_argument(fmt::format("{} '{}' cannot be written to CSV", what, text));
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    if (!out.flush()) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

fs::path polygon_sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".polygons.json");
  return p;
}

std::string fingerprint_csv(const FingerprintMap& map) {
  std::string out = std::string(kFingerprintHeader) + "\n";
  for (const auto& e : map.entries()) {
    std::string kind, value;
    if (const auto* p = std::get_if<PositionLabel>(&e.label)) {
      kind = "position";
      value = fmt::format("{};{}", p->position.x, p->position.y);
    } else {
      kind = "category";
      value = std::get<CategoryLabel>(e.label).name;
      check_field_text(value, "category name");
    }
    for (const auto& [id, rss] : e.rss) {
      check_field_text(id, "base station id");
      out += fmt::format("{},{},{},{},{},{}\n", e.position.x, e.position.y, kind, value, id, rss);
    }
  }
  return out;
}

void write_fingerprint_map(const FingerprintMap& map, const fs::path& csv) {
  json polygons = json::object();
  for (const auto& e : map.entries()) {
    if (const auto* c = std::get_if<CategoryLabel>(&e.label)) {
      json verts = json::array();
      for (const auto& v : c->region.vertices()) verts.push_back({v.x, v.y});
      polygons[c->name] = verts;
    }
  }
  write_file_atomic(csv, fingerprint_csv(map));
  if (!polygons.empty()) write_file_atomic(polygon_sidecar_path(csv), polygons.dump(2) + "\n");
}

FingerprintMap read_fingerprint_map(const fs::path& csv) {
  std::map<std::string, Polygon> polygons;
  const fs::path sidecar = polygon_sidecar_path(csv);
  if (fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw FormatError(fmt::format("{}: {}", sidecar.string(), e.what()));
    }
    if (!doc.is_object()) throw FormatError(fmt::format("{}: expected an object of polygons", sidecar.string()));
    for (const auto& [name, verts] : doc.items()) {
      std::vector<Position> vs;
      if (!verts.is_array()) throw FormatError(fmt::format("{}: polygon '{}' is not a list", sidecar.string(), name));
      for (const auto& v : verts) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
          throw FormatError(fmt::format("{}: polygon '{}' has a malformed vertex", sidecar.string(), name));
        vs.push_back({v[0].get<double>(), v[1].get<double>()});
      }
      try {
        polygons.emplace(name, Polygon(std::move(vs)));
      } catch (const std::invalid_argument& e) {
        throw FormatError(fmt::format("{}: polygon '{}': {}", sidecar.string(), name, e.what()));
      }
    }
  }

  LineReader reader(csv);
  reader.expect_header(kFingerprintHeader);
  std::vector<RawObservation> raw;
  std::string line;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 6) reader.fail(fmt::format("expected 6 fields, got {}", f.size()));
    RawObservation obs;
    obs.position = {reader.number(f[0], "x"), reader.number(f[1], "y")};
    if (f[2] == "position") {
      const auto xy = split(f[3], ';');
      if (xy.size() != 2) reader.fail("position label_value must be 'x;y'");
      obs.label = PositionLabel{{reader.number(xy[0], "label x"), reader.number(xy[1], "label y")}};
    } else if (f[2] == "category") {
      auto it = polygons.find(f[3]);
      if (it == polygons.end())
        reader.fail(fmt::format("category '{}' has no polygon in {}", f[3], sidecar.string()));
      obs.label = CategoryLabel{f[3], it->second};
    } else {
      reader.fail(fmt::format("unknown label_kind '{}'", f[2]));
    }
    if (f[4].empty()) reader.fail("empty bs_id");
    obs.base_station_id = f[4];
    obs.rss_dbm = reader.number(f[5], "rss_dbm");
    if (!std::isfinite(obs.rss_dbm)) reader.fail("rss_dbm must be finite");
    raw.push_back(std::move(obs));
  }
  if (raw.empty()) reader.fail("no fingerprint rows");
  try {
    return build_map(raw);
  } catch (const std::invalid_argument& e) {
    throw FormatError(fmt::format("{}: {}", csv.string(), e.what()));
  }
}

std::string results_csv(const EstimateReport& report) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : report.records) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", strategy_name(r.strategy), r.trial_id,
                       r.truth.x, r.truth.y, r.estimate.x, r.estimate.y, r.error, r.failed ? "true" : "false");
  }
  return out;
}

std::vector<TrialRecord> read_results(const fs::path& path) {
  LineReader reader(path);
  reader.expect_header(kResultsHeader);
  std::vector<TrialRecord> out;
  std::string line;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 8) reader.fail(fmt::format("expected 8 fields, got {}", f.size()));
    TrialRecord r;
    try {
      r.strategy = parse_strategy(f[0]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    r.trial_id = reader.integer(f[1], "trial_id");
    r.truth = {reader.number(f[2], "truth_x"), reader.number(f[3], "truth_y")};
    r.estimate = {reader.number(f[4], "est_x"), reader.number(f[5], "est_y")};
    r.error = reader.number(f[6], "error_m");
    r.failed = reader.boolean(f[7], "failed");
    out.push_back(r);
  }
  return out;
}

std::string summary_csv(const EstimateReport& report) {
  check_field_text(report.scenario, "scenario name");
  std::string out = fmt::format("# schema_version={},scenario={}\n", kSummarySchemaVersion, report.scenario);
  out += std::string(kSummaryHeader) + "\n";
  for (const auto& s : report.summaries) {
    out += fmt::format("{},{:.6f},{:.6f},{},{},{}\n", strategy_name(s.strategy), s.rmse, s.p80, s.n_trials,
                       s.n_failed, s.fcc_pass ? "true" : "false");
  }
  return out;
}

SummaryFile read_summary(const fs::path& path) {
  LineReader reader(path);
  SummaryFile file;
  std::string line;
  if (!reader.next(line) || line.rfind("# ", 0) != 0) reader.fail("missing '# schema_version=...' metadata line");
  bool have_version = false;
  for (const auto& kv : split(line.substr(2))) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) reader.fail(fmt::format("malformed metadata '{}'", kv));
    const auto key = kv.substr(0, eq);
    const auto value = kv.substr(eq + 1);
    if (key == "schema_version") {
      file.schema_version = static_cast<int>(reader.integer(value, "schema_version"));
      have_version = true;
    } else if (key == "scenario") {
      file.scenario = value;
    }
  }
  if (!have_version) reader.fail("metadata has no schema_version");
  if (file.scenario.empty()) reader.fail("metadata has no scenario");

  if (!reader.next(line) || line != kSummaryHeader)
    reader.fail(fmt::format("expected header '{}'", kSummaryHeader));
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 6) reader.fail(fmt::format("expected 6 fields, got {}", f.size()));
    StrategySummary s;
    try {
      s.strategy = parse_strategy(f[0]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    s.rmse = reader.number(f[1], "rmse_m");
    s.p80 = reader.number(f[2], "p80_m");
    s.n_trials = reader.integer(f[3], "n_trials");
    s.n_failed = reader.integer(f[4], "n_failed");
    s.fcc_pass = reader.boolean(f[5], "fcc_pass");
    file.rows.push_back(std::move(s));
  }
  return file;
}

std::string cdf_csv(const StrategySummary& summary) {
  std::string out = std::string(kCdfHeader) + "\n";
  for (const auto& [err, frac] : summary.cdf) out += fmt::format("{:.6f},{:.6f}\n", err, frac);
  return out;
}

std::vector<std::pair<double, double>> read_cdf(const fs::path& path) {
  LineReader reader(path);
  reader.expect_header(kCdfHeader);
  std::vector<std::pair<double, double>> out;
  std::string line;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 2) reader.fail(fmt::format("expected 2 fields, got {}", f.size()));
    out.emplace_back(reader.number(f[0], "error_m"), reader.number(f[1], "fraction"));
  }
  return out;
}

}  // namespace rssloc::io
