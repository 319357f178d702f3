#include "rssloc/scenario.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace rssloc {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument(fmt::format("scenario {}: {}", path, what));
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(path, fmt::format("missing field '{}'", key));
  return obj.at(key);
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) schema_error(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

Position get_position(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    schema_error(path, "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<Position> get_positions(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected a list of [x, y]");
  std::vector<Position> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_position(v[i], fmt::format("{}[{}]", path, i)));
  return out;
}

PathLossModel get_model(const json& v, const std::string& path) {
  PathLossModel m;
  m.p0 = get_number(require(v, "p0", path), path + ".p0");
  m.beta = get_number(require(v, "beta", path), path + ".beta");
  m.sigma_db = get_number(require(v, "sigma_db", path), path + ".sigma_db");
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    schema_error(path, e.what());
  }
  return m;
}

json position_json(const Position& p) { return json::array({p.x, p.y}); }

json model_json(const PathLossModel& m) {
  return {{"p0", m.p0}, {"beta", m.beta}, {"sigma_db", m.sigma_db}};
}

std::vector<Position> draw_targets(const Scenario& s, std::size_t count) {
  if (count > s.fingerprint_grid.size())
    throw std::invalid_argument(fmt::format("cannot draw {} targets from {} fingerprint sites", count,
                                            s.fingerprint_grid.size()));
  std::vector<Position> pool;
  for (const auto& site : s.fingerprint_grid) pool.push_back(site.position);
  auto rng = scenario_stream(s, StreamTag::TargetDraw);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample without replacement.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

void Scenario::validate() const {
  const auto fail = [&](const std::string& what) {
    throw std::invalid_argument(fmt::format("scenario '{}': {}", name, what));
  };
  if (bounds.empty() || !(bounds.area() > 0.0)) fail("bounds must have positive area");
  if (receivers.empty()) fail("at least one receiver is required");
  for (const auto& r : receivers)
    if (!bounds.contains(r)) fail(fmt::format("receiver ({}, {}) lies outside bounds", r.x, r.y));
  if (targets.empty()) fail("at least one target is required");
  for (const auto& t : targets)
    if (!bounds.contains(t)) fail(fmt::format("target ({}, {}) lies outside bounds", t.x, t.y));
  for (const auto& f : fingerprint_grid)
    if (!bounds.contains(f.position))
      fail(fmt::format("fingerprint site ({}, {}) lies outside bounds", f.position.x, f.position.y));
  if (trials_per_target < 1) fail("trials_per_target must be at least 1");
  if (fingerprint_draws < 1) fail("fingerprint_draws must be at least 1");
  if (knn_k < 1) fail("knn_k must be at least 1");
  if (!fingerprint_grid.empty() && knn_k > fingerprint_grid.size())
    fail(fmt::format("knn_k = {} exceeds {} fingerprint sites", knn_k, fingerprint_grid.size()));
  if (!(fused_weight >= 0.0)) fail("fused_weight must be non-negative");
  if (!(grid_resolution > 0.0)) fail("grid_resolution must be positive");
  if (!(half_widths.rand > 0.0 && half_widths.sdp > 0.0 && half_widths.fp > 0.0))
    fail("init_half_widths must be positive");
  ul_model.validate();
  std::set<std::string> ids;
  for (const auto& bs : base_stations) {
    bs.model.validate();
    if (!ids.insert(bs.id).second) fail(fmt::format("duplicate base station id '{}'", bs.id));
  }
}

LocalizeConfig Scenario::localize_config() const {
  LocalizeConfig c;
  c.bounds = bounds;
  c.grid_resolution = grid_resolution;
  c.rand_half_width = half_widths.rand;
  c.sdp_half_width = half_widths.sdp;
  c.fp_position_range = half_widths.fp;
  c.knn_k = knn_k;
  c.fused_weight = fused_weight;
  return c;
}

RandomStream scenario_stream(const Scenario& s, StreamTag tag, std::uint64_t a, std::uint64_t b) {
  return make_stream(s.seed, {static_cast<std::uint64_t>(tag), a, b});
}

std::vector<Position> lattice_over(const Box& bounds, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
  std::vector<Position> out;
  const auto nx = static_cast<long>(std::floor((bounds.max.x - bounds.min.x) / spacing + 1e-9));
  const auto ny = static_cast<long>(std::floor((bounds.max.y - bounds.min.y) / spacing + 1e-9));
  for (long i = 0; i <= nx; ++i)
    for (long j = 0; j <= ny; ++j)
      out.push_back({bounds.min.x + static_cast<double>(i) * spacing, bounds.min.y + static_cast<double>(j) * spacing});
  return out;
}

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("$", "expected an object");
  const auto version = require(doc, "schema_version", "$");
  if (!version.is_number_integer() || version.get<int>() != kScenarioSchemaVersion)
    schema_error("$.schema_version", fmt::format("unsupported version (expected {})", kScenarioSchemaVersion));

  Scenario s;
  s.name = get_string(require(doc, "name", "$"), "$.name");
  const auto& bounds = require(doc, "bounds", "$");
  s.bounds = {get_position(require(bounds, "min", "$.bounds"), "$.bounds.min"),
              get_position(require(bounds, "max", "$.bounds.max"), "$.bounds.max")};
  s.receivers = get_positions(require(doc, "receivers", "$"), "$.receivers");
  s.ul_model = get_model(require(doc, "ul_model", "$"), "$.ul_model");

  if (doc.contains("base_stations")) {
    const auto& list = doc.at("base_stations");
    if (!list.is_array()) schema_error("$.base_stations", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto path = fmt::format("$.base_stations[{}]", i);
      BaseStation bs;
      bs.id = get_string(require(list[i], "id", path), path + ".id");
      bs.position = get_position(require(list[i], "position", path), path + ".position");
      bs.model = get_model(require(list[i], "model", path), path + ".model");
      s.base_stations.push_back(std::move(bs));
    }
  }

  std::map<std::string, Polygon> categories;
  if (doc.contains("categories")) {
    const auto& cats = doc.at("categories");
    if (!cats.is_object()) schema_error("$.categories", "expected an object of polygons");
    for (const auto& [name, verts] : cats.items()) {
      const auto path = "$.categories." + name;
      try {
        categories.emplace(name, Polygon(get_positions(verts, path)));
      } catch (const std::invalid_argument& e) {
        schema_error(path, e.what());
      }
    }
  }

  if (doc.contains("fingerprint_grid")) {
    const auto& grid = doc.at("fingerprint_grid");
    if (grid.is_object()) {
      const double spacing = get_number(require(grid, "spacing", "$.fingerprint_grid"), "$.fingerprint_grid.spacing");
      if (!(spacing > 0.0)) schema_error("$.fingerprint_grid.spacing", "must be positive");
      for (const auto& p : lattice_over(s.bounds, spacing)) s.fingerprint_grid.push_back({p, PositionLabel{p}});
    } else if (grid.is_array()) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto path = fmt::format("$.fingerprint_grid[{}]", i);
        FingerprintSite site;
        site.position = get_position(require(grid[i], "position", path), path + ".position");
        const auto& label = require(grid[i], "label", path);
        const auto kind = get_string(require(label, "kind", path + ".label"), path + ".label.kind");
        if (kind == "position") {
          site.label = PositionLabel{label.contains("position")
                                         ? get_position(label.at("position"), path + ".label.position")
                                         : site.position};
        } else if (kind == "category") {
          const auto name = get_string(require(label, "name", path + ".label"), path + ".label.name");
          auto it = categories.find(name);
          if (it == categories.end()) schema_error(path + ".label.name", fmt::format("unknown category '{}'", name));
          site.label = CategoryLabel{name, it->second};
        } else {
          schema_error(path + ".label.kind", fmt::format("unknown label kind '{}'", kind));
        }
        s.fingerprint_grid.push_back(std::move(site));
      }
    } else {
      schema_error("$.fingerprint_grid", "expected a list of sites or {\"spacing\": m}");
    }
  }

  s.trials_per_target = get_count(require(doc, "trials_per_target", "$"), "$.trials_per_target");
  if (doc.contains("fingerprint_draws")) s.fingerprint_draws = get_count(doc.at("fingerprint_draws"), "$.fingerprint_draws");
  if (doc.contains("knn_k")) s.knn_k = get_count(doc.at("knn_k"), "$.knn_k");
  if (doc.contains("fused_weight")) s.fused_weight = get_number(doc.at("fused_weight"), "$.fused_weight");
  if (doc.contains("grid_resolution")) s.grid_resolution = get_number(doc.at("grid_resolution"), "$.grid_resolution");
  if (doc.contains("init_half_widths")) {
    const auto& hw = doc.at("init_half_widths");
    s.half_widths.rand = get_number(require(hw, "rand", "$.init_half_widths"), "$.init_half_widths.rand");
    s.half_widths.sdp = get_number(require(hw, "sdp", "$.init_half_widths"), "$.init_half_widths.sdp");
    s.half_widths.fp = get_number(require(hw, "fp", "$.init_half_widths"), "$.init_half_widths.fp");
  }
  if (doc.contains("seed")) {
    const auto& seed = doc.at("seed");
    if (!seed.is_number_unsigned()) schema_error("$.seed", "expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
  }

  const bool explicit_targets = doc.contains("targets");
  const bool random_targets = doc.contains("random_targets");
  if (explicit_targets == random_targets)
    schema_error("$", "exactly one of 'targets' or 'random_targets' is required");
  if (explicit_targets) {
    s.targets = get_positions(doc.at("targets"), "$.targets");
  } else {
    s.random_target_count = get_count(doc.at("random_targets"), "$.random_targets");
    s.targets = draw_targets(s, *s.random_target_count);
  }

  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["name"] = s.name;
  doc["bounds"] = {{"min", position_json(s.bounds.min)}, {"max", position_json(s.bounds.max)}};
  doc["receivers"] = json::array();
  for (const auto& r : s.receivers) doc["receivers"].push_back(position_json(r));
  doc["ul_model"] = model_json(s.ul_model);
  doc["base_stations"] = json::array();
  for (const auto& bs : s.base_stations)
    doc["base_stations"].push_back({{"id", bs.id}, {"position", position_json(bs.position)}, {"model", model_json(bs.model)}});
  json categories = json::object();
  doc["fingerprint_grid"] = json::array();
  for (const auto& site : s.fingerprint_grid) {
    json label;
    if (const auto* p = std::get_if<PositionLabel>(&site.label)) {
      label = {{"kind", "position"}, {"position", position_json(p->position)}};
    } else {
      const auto& c = std::get<CategoryLabel>(site.label);
      label = {{"kind", "category"}, {"name", c.name}};
      json verts = json::array();
      for (const auto& v : c.region.vertices()) verts.push_back(position_json(v));
      categories[c.name] = verts;
    }
    doc["fingerprint_grid"].push_back({{"position", position_json(site.position)}, {"label", label}});
  }
  if (!categories.empty()) doc["categories"] = categories;
  if (s.random_target_count) {
    doc["random_targets"] = *s.random_target_count;
  } else {
    doc["targets"] = json::array();
    for (const auto& t : s.targets) doc["targets"].push_back(position_json(t));
  }
  doc["trials_per_target"] = s.trials_per_target;
  doc["fingerprint_draws"] = s.fingerprint_draws;
  doc["knn_k"] = s.knn_k;
  doc["fused_weight"] = s.fused_weight;
  doc["grid_resolution"] = s.grid_resolution;
  doc["init_half_widths"] = {{"rand", s.half_widths.rand}, {"sdp", s.half_widths.sdp}, {"fp", s.half_widths.fp}};
  doc["seed"] = s.seed;
  return doc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open scenario file '{}'", path));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path, e.what()));
  }
  try {
    return scenario_from_json(doc);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path, e.what()));
  }
}

Scenario with_seed(Scenario s, std::uint64_t seed) {
  s.seed = seed;
  if (s.random_target_count) s.targets = draw_targets(s, *s.random_target_count);
  return s;
}

FingerprintMap build_fingerprint_from_scenario(const Scenario& s, std::size_t draws_per_point,
                                               RandomStream& rng) {
  if (s.fingerprint_grid.empty()) throw std::invalid_argument("scenario has no fingerprint grid");
  if (s.base_stations.empty()) throw std::invalid_argument("scenario has no base stations");
  if (draws_per_point < 1) throw std::invalid_argument("need at least one draw per fingerprint site");

  std::vector<RawObservation> raw;
  raw.reserve(s.fingerprint_grid.size() * s.base_stations.size() * draws_per_point);
  for (const auto& site : s.fingerprint_grid) {
    for (const auto& bs : s.base_stations) {
      for (std::size_t d = 0; d < draws_per_point; ++d) {
        const auto sample = sample_rss(bs.model, bs.position, site.position, rng, Link::Downlink, bs.id);
        raw.push_back({site.position, site.label, bs.id, sample.value});
      }
    }
  }
  return build_map(raw);
}

MeasurementSet generate_trial(const Scenario& s, std::size_t target_index, std::uint64_t trial_id,
                              RandomStream& rng) {
  if (target_index >= s.targets.size()) throw std::out_of_range("target index out of range");
  MeasurementSet m;
  m.trial_id = trial_id;
  m.target_index = target_index;
  m.truth = s.targets[target_index];
  m.ul.reserve(s.receivers.size());
  for (const auto& r : s.receivers)
    m.ul.push_back({r, sample_rss(s.ul_model, m.truth, r, rng, Link::Uplink).value});
  for (const auto& bs : s.base_stations)
    m.dl[bs.id] = sample_rss(bs.model, bs.position, m.truth, rng, Link::Downlink, bs.id).value;
  return m;
}

RandomStream trial_stream(const Scenario& s, std::size_t target_index, std::uint64_t trial_id) {
  return scenario_stream(s, StreamTag::Measurement, target_index, trial_id);
}

EstimateReport run_experiment(const Scenario& s, const std::set<Strategy>& strategies,
                              const FingerprintMap* map, const RunOptions& options) {
  EstimateReport report;
  report.scenario = s.name;
  if (strategies.empty()) return report;
  if (strategies.contains(Strategy::Fp) && map == nullptr)
    throw std::invalid_argument("FP strategy requested without a fingerprint map");

  const LocalizeConfig config = s.localize_config();
  const std::vector<Strategy> order(strategies.begin(), strategies.end());
  const std::size_t n_trials = s.targets.size() * s.trials_per_target;
  std::vector<TrialRecord> slots(n_trials * order.size());

  const auto run_one = [&](std::size_t work) {
    const std::size_t target = work / s.trials_per_target;
    const std::uint64_t trial_id = work;
    auto rng = trial_stream(s, target, work % s.trials_per_target);
    const MeasurementSet m = generate_trial(s, target, trial_id, rng);

    for (std::size_t k = 0; k < order.size(); ++k) {
      TrialRecord& rec = slots[k * n_trials + work];
      rec.strategy = order[k];
      rec.trial_id = trial_id;
      rec.truth = m.truth;
      auto init_rng = scenario_stream(s, StreamTag::RandomInit, target, work % s.trials_per_target);
      LocalizeInputs in{m.ul, s.ul_model.beta, &m.dl, map, &init_rng};
      try {
        const auto result = localize(order[k], config, in);
        rec.estimate = result.estimate;
        rec.error = distance(m.truth, result.estimate);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.failure = e.what();
        rec.estimate = {std::nan(""), std::nan("")};
        rec.error = std::nan("");
      }
    }
  };

  unsigned jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n_trials, 1)));
  if (jobs <= 1) {
    for (std::size_t w = 0; w < n_trials; ++w) run_one(w);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t w = next++; w < n_trials; w = next++) run_one(w);
      });
    }
  }

  report.records = std::move(slots);
  report.summaries = summarize(report.records);
  return report;
}

Scenario make_poor_geometry(const Scenario& s, double radius, const Position& center) {
  if (!(radius > 0.0)) throw std::invalid_argument("cluster radius must be positive");
  Scenario out = s;
  out.name = s.name + "-poor";
  auto rng = scenario_stream(s, StreamTag::PoorGeometry);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& r : out.receivers) {
    // Rejection keeps the draw uniform over the part of the disk inside the bounds.
    for (int attempt = 0;; ++attempt) {
      const double rho = radius * std::sqrt(unit(rng));
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const Position p{center.x + rho * std::cos(phi), center.y + rho * std::sin(phi)};
      if (s.bounds.contains(p)) {
        r = p;
        break;
      }
      if (attempt > 10000) throw std::invalid_argument("cluster disk does not overlap the bounds");
    }
  }
  return out;
}

}  // namespace rssloc
