#include "dispatchlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dispatchlab/errors.hpp"
#include "text_util.hpp"

namespace dispatchlab {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view mode_name(UtilityMode m) {
  return m == UtilityMode::paper ? "paper" : "derived";
}

UtilityMode mode_from_name(const std::string& s) {
  if (s == "paper") return UtilityMode::paper;
  if (s == "derived") return UtilityMode::derived;
  throw ConfigError("unknown utility mode '" + s + "' (expected derived or paper)");
}

std::string_view scope_name(FairnessScope s) {
  return s == FairnessScope::matched_only ? "matched_only" : "all_available";
}

FairnessScope scope_from_name(const std::string& s) {
  if (s == "matched_only") return FairnessScope::matched_only;
  if (s == "all_available") return FairnessScope::all_available;
  throw ConfigError("unknown fairness scope '" + s +
                    "' (expected all_available or matched_only)");
}

std::string_view source_name(DistanceSource s) {
  return s == DistanceSource::recorded ? "recorded" : "geometric";
}

DistanceSource source_from_name(const std::string& s) {
  if (s == "recorded") return DistanceSource::recorded;
  if (s == "geometric") return DistanceSource::geometric;
  throw ConfigError("unknown distance source '" + s +
                    "' (expected recorded or geometric)");
}

ordered_json source_to_json(const ScenarioSource& src) {
  ordered_json j;
  j["kind"] = src.is_dataset ? "dataset" : "synthetic";
  j["seed"] = src.seed;
  j["lev_pct"] = src.lev_pct;
  j["tile_width_km"] = src.tile_width_km;
  j["n_drivers"] = src.n_drivers;
  ordered_json profile = ordered_json::array();
  for (const auto& c : src.profile.classes) {
    profile.push_back({{"name", c.name}, {"g_per_km", c.g_per_km},
                       {"weight", c.weight},
                       {"half_width_g_per_km", c.half_width_g_per_km}});
  }
  j["profile"] = std::move(profile);
  if (src.is_dataset) {
    j["dataset_path"] = src.dataset_path.string();
    j["distance_source"] = source_name(src.distance_source);
    j["columns"] = {{"start_ts", src.columns.start_ts},
                    {"start_lat", src.columns.start_lat},
                    {"start_lon", src.columns.start_lon},
                    {"end_lat", src.columns.end_lat},
                    {"end_lon", src.columns.end_lon},
                    {"trip_km", src.columns.trip_km},
                    {"driver_id", src.columns.driver_id}};
  } else {
    j["n_requests"] = src.n_requests;
    j["duration_s"] = src.duration_s;
    j["area"] = {{"sw_lat", src.area.sw.lat},
                 {"sw_lon", src.area.sw.lon},
                 {"ne_lat", src.area.ne.lat},
                 {"ne_lon", src.area.ne.lon}};
    ordered_json spots = ordered_json::array();
    for (const auto& h : src.hotspots.hotspots) {
      spots.push_back({{"lat", h.center.lat}, {"lon", h.center.lon},
                       {"weight", h.weight}, {"sigma_km", h.sigma_km}});
    }
    j["hotspots"] = {{"uniform_weight", src.hotspots.uniform_weight},
                     {"list", std::move(spots)}};
  }
  return j;
}

ScenarioSource source_from_json(const ordered_json& j) {
  ScenarioSource src;
  src.is_dataset = j.at("kind").get<std::string>() == "dataset";
  src.seed = j.at("seed").get<std::uint64_t>();
  src.lev_pct = j.at("lev_pct").get<double>();
  src.tile_width_km = j.at("tile_width_km").get<double>();
  src.n_drivers = j.at("n_drivers").get<int>();
  src.profile.classes.clear();
  for (const auto& c : j.at("profile")) {
    src.profile.classes.push_back(FleetClassSpec{
        c.at("name").get<std::string>(), c.at("g_per_km").get<double>(),
        c.at("weight").get<double>(), c.value("half_width_g_per_km", 0.0)});
  }
  if (src.is_dataset) {
    src.dataset_path = j.at("dataset_path").get<std::string>();
    src.distance_source = source_from_name(j.at("distance_source").get<std::string>());
    const auto& cols = j.at("columns");
    src.columns.start_ts = cols.at("start_ts").get<std::string>();
    src.columns.start_lat = cols.at("start_lat").get<std::string>();
    src.columns.start_lon = cols.at("start_lon").get<std::string>();
    src.columns.end_lat = cols.at("end_lat").get<std::string>();
    src.columns.end_lon = cols.at("end_lon").get<std::string>();
    src.columns.trip_km = cols.at("trip_km").get<std::string>();
    src.columns.driver_id = cols.at("driver_id").get<std::string>();
  } else {
    src.n_requests = j.at("n_requests").get<int>();
    src.duration_s = j.at("duration_s").get<double>();
    const auto& a = j.at("area");
    src.area = BoundingBox{GeoPoint(a.at("sw_lat").get<double>(),
                                    a.at("sw_lon").get<double>()),
                           GeoPoint(a.at("ne_lat").get<double>(),
                                    a.at("ne_lon").get<double>())};
    const auto& h = j.at("hotspots");
    src.hotspots.uniform_weight = h.at("uniform_weight").get<double>();
    src.hotspots.hotspots.clear();
    for (const auto& s : h.at("list")) {
      src.hotspots.hotspots.push_back(Hotspot{
          GeoPoint(s.at("lat").get<double>(), s.at("lon").get<double>()),
          s.at("weight").get<double>(), s.at("sigma_km").get<double>()});
    }
  }
  return src;
}

ordered_json config_to_json(const SimConfig& cfg) {
  ordered_json j;
  j["batch_duration_s"] = cfg.batch_duration_s;
  j["eta_g_per_km"] = cfg.eta_g_per_km;
  j["gamma"] = cfg.gamma;
  j["alpha"] = cfg.alpha;
  j["speed_kmh"] = cfg.speed_kmh;
  j["max_wait_s"] = cfg.max_wait_s;
  j["availability_window_s"] = cfg.availability_window_s;
  j["candidate_radius_km"] = cfg.candidate_radius_km;
  j["circuity"] = cfg.circuity;
  j["tora_e2d_threshold_g_per_km"] = cfg.tora_e2d_threshold_g_per_km;
  j["laf_lambda"] = cfg.laf_lambda;
  j["utility_mode"] = mode_name(cfg.utility_mode);
  j["fairness_scope"] = scope_name(cfg.fairness_scope);
  j["seed"] = cfg.seed;
  if (cfg.warm_start) {
    j["warm_start"] = cfg.warm_start->string();
  } else {
    j["warm_start"] = nullptr;
  }
  return j;
}

SimConfig config_from_json(const ordered_json& j) {
  SimConfig cfg;
  cfg.batch_duration_s = j.at("batch_duration_s").get<double>();
  cfg.eta_g_per_km = j.at("eta_g_per_km").get<double>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.speed_kmh = j.at("speed_kmh").get<double>();
  cfg.max_wait_s = j.at("max_wait_s").get<double>();
  cfg.availability_window_s = j.at("availability_window_s").get<double>();
  cfg.candidate_radius_km = j.at("candidate_radius_km").get<double>();
  cfg.circuity = j.at("circuity").get<double>();
  cfg.tora_e2d_threshold_g_per_km = j.at("tora_e2d_threshold_g_per_km").get<double>();
  cfg.laf_lambda = j.at("laf_lambda").get<double>();
  cfg.utility_mode = mode_from_name(j.at("utility_mode").get<std::string>());
  cfg.fairness_scope = scope_from_name(j.at("fairness_scope").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("warm_start").is_null()) {
    cfg.warm_start = fs::path(j.at("warm_start").get<std::string>());
  }
  return cfg;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const fs::filesystem_error*>(&e) != nullptr) return 3;
  return 2;
}

int guarded(const char* verb, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "dispatch-lab: " << verb << " failed: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace

ScenarioSource resolve_source(ScenarioSource source) {
  if (source.profile.classes.empty()) {
    source.profile = FleetProfile::default_mixed();
  }
  if (!source.is_dataset) {
    if (source.area.sw == source.area.ne) {
      source.area = default_service_area();
    }
    if (source.hotspots.hotspots.empty() && source.hotspots.uniform_weight <= 0.0) {
      source.hotspots = HotspotConfig::default_city(source.area);
    }
  }
  return source;
}

Scenario make_scenario(const ScenarioSource& raw) {
  const ScenarioSource source = resolve_source(raw);
  Scenario scenario;
  if (source.is_dataset) {
    const TripLog log =
        load_trips(source.dataset_path, source.distance_source, source.columns);
    if (log.requests.empty()) {
      throw ConfigError("dataset " + source.dataset_path.string() +
                        " produced no usable trips");
    }
    scenario.requests = log.requests;
    scenario.fleet =
        fleet_from_trip_log(log, source.profile, source.n_drivers, source.seed);
    scenario.grid =
        grid_for(bounding_box_of(scenario.requests), source.tile_width_km);
    scenario.seed = source.seed;
  } else {
    SynthParams params;
    params.n_requests = source.n_requests;
    params.n_drivers = source.n_drivers;
    params.duration_s = source.duration_s;
    params.hotspots = source.hotspots;
    params.profile = source.profile;
    params.area = source.area;
    params.tile_width_km = source.tile_width_km;
    params.seed = source.seed;
    scenario = synth_scenario(params);
  }
  if (source.lev_pct > 0.0) {
    scenario.fleet = electrify(std::move(scenario.fleet), source.lev_pct,
                               source.seed ^ 0xe1ec7f1ca7f1ee7ULL);
  }
  return scenario;
}

std::string manifest_json(const SingleRun& run,
                          const std::string& scenario_fingerprint) {
  ordered_json j;
  j["tool"] = std::string(kToolName);
  j["version"] = std::string(kToolVersion);
  j["policy"] = std::string(to_string(run.policy));
  j["scenario"] = source_to_json(resolve_source(run.source));
  j["sim"] = config_to_json(run.config);
  j["scenario_fingerprint"] = scenario_fingerprint;
  return j.dump(2) + "\n";
}

SingleRun parse_manifest(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest parse failure: ") + e.what());
  }
  try {
    if (j.at("tool").get<std::string>() != kToolName) {
      throw ConfigError("manifest was not written by " + std::string(kToolName));
    }
    SingleRun run;
    run.policy = policy_from_name(j.at("policy").get<std::string>());
    run.source = source_from_json(j.at("scenario"));
    run.config = config_from_json(j.at("sim"));
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest parse failure: ") + e.what());
  }
}

SingleRun load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read manifest: " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MetricsReport execute_single(const SingleRun& run, const Scenario& scenario,
                             const fs::path& out_root) {
  const std::string scenario_fp = fingerprint(serialize_scenario(scenario));
  const std::string manifest = manifest_json(run, scenario_fp);
  const fs::path run_dir =
      out_root / std::string(to_string(run.policy)) / fingerprint(manifest);
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) {
    throw IoError("cannot create run directory " + run_dir.string() + ": " +
                  ec.message());
  }

  const SimResult result = dispatchlab::run(scenario, run.policy, run.config);

  export_trips_csv(result, run_dir / "trips.csv");
  export_drivers_csv(result, run_dir / "drivers.csv");
  result.value_table.save(run_dir / "values.csv");
  const MetricsReport report = summarize(result);
  {
    std::ofstream out(run_dir / "metrics.csv");
    if (!out) {
      throw IoError("cannot write metrics file in " + run_dir.string());
    }
    out << metrics_csv(report);
  }
  {
    std::ofstream out(run_dir / "manifest.json");
    if (!out) {
      throw IoError("cannot write manifest in " + run_dir.string());
    }
    out << manifest;
  }
  return report;
}

int cmd_run(const RunSpec& spec) {
  return guarded("run", [&] {
    if (spec.policies.empty()) {
      throw ConfigError("at least one policy is required");
    }
    const Scenario scenario = make_scenario(spec.source);
    if (!spec.scenario_out.empty()) {
      save_scenario(scenario, spec.scenario_out);
    }
    for (const PolicyKind policy : spec.policies) {
      execute_single(SingleRun{spec.source, policy, spec.config}, scenario,
                     spec.out_dir);
    }
  });
}

int cmd_sweep(const RunSpec& spec) {
  return guarded("sweep", [&] {
    if (spec.policies.empty()) {
      throw ConfigError("at least one policy is required");
    }
    if (spec.batch_minutes_axis.empty() || spec.eta_axis.empty() ||
        spec.lev_pct_axis.empty()) {
      throw ConfigError("sweep axes must be non-empty");
    }
    if (spec.workers < 1) {
      throw ConfigError("workers must be at least 1");
    }

    // Runs sharing (source, seed, lev_pct) must consume an identical
    // scenario, so scenarios are built once per electrification level.
    std::vector<std::pair<double, Scenario>> scenarios;
    for (const double lev : spec.lev_pct_axis) {
      ScenarioSource src = spec.source;
      src.lev_pct = lev;
      scenarios.emplace_back(lev, make_scenario(src));
    }

    struct Job {
      SingleRun run;
      const Scenario* scenario;
      SweepKey key;
    };
    std::vector<Job> jobs;
    for (std::size_t li = 0; li < scenarios.size(); ++li) {
      for (const double batch_min : spec.batch_minutes_axis) {
        for (const double eta : spec.eta_axis) {
          for (const PolicyKind policy : spec.policies) {
            SingleRun run{spec.source, policy, spec.config};
            run.source.lev_pct = scenarios[li].first;
            run.config.batch_duration_s = batch_min * 60.0;
            run.config.eta_g_per_km = eta;
            jobs.push_back(Job{std::move(run), &scenarios[li].second,
                               SweepKey{std::string(to_string(policy)),
                                        batch_min * 60.0, eta,
                                        scenarios[li].first}});
          }
        }
      }
    }

    std::vector<std::pair<SweepKey, MetricsReport>> results(jobs.size());
    std::atomic<std::size_t> cursor{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto worker = [&] {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          results[i] = {jobs[i].key,
                        execute_single(jobs[i].run, *jobs[i].scenario,
                                       spec.out_dir)};
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };

    const int n_workers =
        std::min<int>(spec.workers, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);

    const auto rows = sweep_table(results);
    {
      std::ofstream out(spec.out_dir / "sweep.csv");
      if (!out) {
        throw IoError("cannot write sweep table in " + spec.out_dir.string());
      }
      out << sweep_table_csv(rows);
    }

    ordered_json summary;
    summary["tool"] = std::string(kToolName);
    summary["version"] = std::string(kToolVersion);
    ordered_json runs = ordered_json::array();
    for (const auto& [key, rep] : results) {
      ordered_json r;
      r["policy"] = key.policy;
      r["batch_duration_s"] = key.batch_duration_s;
      r["eta_g_per_km"] = key.eta_g_per_km;
      r["lev_pct"] = key.lev_pct;
      if (rep.emissions_g_per_trip) r["emissions_g_per_trip"] = *rep.emissions_g_per_trip;
      r["fairness_gap_km"] = rep.fairness_gap_km;
      if (rep.mean_wait_s) r["mean_wait_s"] = *rep.mean_wait_s;
      r["served_count"] = rep.served_count;
      r["dropped_count"] = rep.dropped_count;
      if (rep.lev_trip_share) r["lev_trip_share"] = *rep.lev_trip_share;
      runs.push_back(std::move(r));
    }
    summary["runs"] = std::move(runs);

    // Cross-policy view: each configuration normalized to its LAF run when
    // one exists.
    ordered_json normalized = ordered_json::array();
    for (const auto& [key, rep] : results) {
      if (key.policy == "laf") continue;
      const auto baseline = std::find_if(
          results.begin(), results.end(), [&](const auto& other) {
            return other.first.policy == "laf" &&
                   other.first.batch_duration_s == key.batch_duration_s &&
                   other.first.eta_g_per_km == key.eta_g_per_km &&
                   other.first.lev_pct == key.lev_pct;
          });
      if (baseline == results.end()) continue;
      try {
        const NormalizedReport n = normalize(rep, baseline->second);
        normalized.push_back({{"policy", key.policy},
                              {"batch_duration_s", key.batch_duration_s},
                              {"eta_g_per_km", key.eta_g_per_km},
                              {"lev_pct", key.lev_pct},
                              {"emissions_ratio", n.emissions_ratio},
                              {"fairness_ratio", n.fairness_ratio},
                              {"wait_ratio", n.wait_ratio}});
      } catch (const NormalizationError&) {
        // skip configurations whose baseline has no usable metric
      }
    }
    summary["normalized_to_laf"] = std::move(normalized);

    std::ofstream out(spec.out_dir / "summary.json");
    if (!out) {
      throw IoError("cannot write sweep summary in " + spec.out_dir.string());
    }
    out << summary.dump(2) << "\n";
  });
}

int cmd_replay(const fs::path& manifest_path, const fs::path& out_root) {
  return guarded("replay", [&] {
    const SingleRun run = load_manifest(manifest_path);
    const Scenario scenario = make_scenario(run.source);
    execute_single(run, scenario, out_root);
  });
}

}  // namespace dispatchlab
