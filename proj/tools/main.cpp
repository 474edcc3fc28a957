// dispatch-lab: batched ridesharing dispatch simulator.
//
//   dispatch-lab run --synthetic --requests 2000 --drivers 20
//       --policy lead,cd --eta 5 --batch-minutes 5 --seed 7 --out runs
//   dispatch-lab sweep --synthetic --policy lead,cd,tora,laf
//       --batch-minutes 2,5,10 --eta 0.1,1,5,10 --lev-pct 0,10,15,25
//   dispatch-lab run --manifest runs/lead/<hash>/manifest.json --out replay

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dispatchlab/errors.hpp"
#include "dispatchlab/runner.hpp"

namespace {

using dispatchlab::ConfigError;
using dispatchlab::IoError;

struct CommonOptions {
  std::string dataset_path;
  bool synthetic = false;
  std::string distance_source = "geometric";
  int requests = 2000;
  int drivers = 20;
  double duration_hours = 24.0;
  std::string policies = "lead";
  double gamma = 0.9;
  double alpha = 0.025;
  double speed_kmh = 30.0;
  double max_wait_min = 15.0;
  double availability_min = 15.0;
  double radius_km = 8.0;
  double circuity = 1.0;
  double tile_width_km = 1.0;
  double tora_threshold = 100.0;
  double laf_lambda = 1.0;
  std::string utility_mode = "derived";
  std::string fairness_scope = "all_available";
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config_file;
  std::string warm_start;
  int workers = 1;
};

void add_common_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--dataset", o.dataset_path,
                  "Trip-log file (comma-separated with header)");
  cmd->add_flag("--synthetic", o.synthetic,
                "Generate a synthetic scenario (default when --dataset absent)");
  cmd->add_option("--distance-source", o.distance_source,
                  "Trip distance for dataset runs: recorded|geometric")
      ->check(CLI::IsMember({"recorded", "geometric"}));
  cmd->add_option("--requests", o.requests, "Synthetic request count");
  cmd->add_option("--drivers", o.drivers,
                  "Fleet size (synthetic) or dataset fallback fleet size");
  cmd->add_option("--duration-hours", o.duration_hours,
                  "Synthetic scenario span in hours");
  cmd->add_option("--policy", o.policies,
                  "Comma-separated policy list: lead,cd,tora,laf");
  cmd->add_option("--gamma", o.gamma, "Discount factor");
  cmd->add_option("--alpha", o.alpha, "Learning rate");
  cmd->add_option("--speed-kmh", o.speed_kmh, "Constant vehicle speed");
  cmd->add_option("--max-wait-min", o.max_wait_min,
                  "Rider patience before a pending request is dropped");
  cmd->add_option("--availability-min", o.availability_min,
                  "Window within which busy drivers count as assignable");
  cmd->add_option("--radius-km", o.radius_km, "Candidate pickup radius");
  cmd->add_option("--circuity", o.circuity, "Deadhead circuity factor (>= 1)");
  cmd->add_option("--tile-km", o.tile_width_km, "Grid tile width");
  cmd->add_option("--tora-threshold", o.tora_threshold,
                  "TORA E2D acceptance threshold in gCO2/km");
  cmd->add_option("--laf-lambda", o.laf_lambda, "LAF equity weight");
  cmd->add_option("--utility-mode", o.utility_mode,
                  "Utility weight reading: derived|paper")
      ->check(CLI::IsMember({"derived", "paper"}));
  cmd->add_option("--fairness-scope", o.fairness_scope,
                  "Batch fairness over: all_available|matched_only")
      ->check(CLI::IsMember({"all_available", "matched_only"}));
  cmd->add_option("--seed", o.seed, "Scenario seed");
  cmd->add_option("--out", o.out_dir, "Output root directory")
      ->envname("DISPATCH_LAB_OUT");
  cmd->add_option("--config", o.config_file,
                  "JSON file with fleet profile, hotspots, area and column "
                  "mapping");
  cmd->add_option("--warm-start", o.warm_start,
                  "Value-table snapshot to preload");
  cmd->add_option("--workers", o.workers, "Concurrent runs in a sweep");
}

void apply_config_file(const std::string& path, dispatchlab::ScenarioSource& src) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file parse failure: " + std::string(e.what()));
  }
  try {
    if (j.contains("profile")) {
      src.profile.classes.clear();
      for (const auto& c : j["profile"]) {
        src.profile.classes.push_back(dispatchlab::FleetClassSpec{
            c.at("name").get<std::string>(), c.at("g_per_km").get<double>(),
            c.at("weight").get<double>(),
            c.value("half_width_g_per_km", 0.0)});
      }
    }
    if (j.contains("area")) {
      const auto& a = j["area"];
      src.area = dispatchlab::BoundingBox{
          dispatchlab::GeoPoint(a.at("sw_lat").get<double>(),
                                a.at("sw_lon").get<double>()),
          dispatchlab::GeoPoint(a.at("ne_lat").get<double>(),
                                a.at("ne_lon").get<double>())};
    }
    if (j.contains("hotspots")) {
      const auto& h = j["hotspots"];
      src.hotspots.uniform_weight = h.value("uniform_weight", 0.0);
      src.hotspots.hotspots.clear();
      for (const auto& s : h.value("list", nlohmann::json::array())) {
        src.hotspots.hotspots.push_back(dispatchlab::Hotspot{
            dispatchlab::GeoPoint(s.at("lat").get<double>(),
                                  s.at("lon").get<double>()),
            s.at("weight").get<double>(), s.at("sigma_km").get<double>()});
      }
    }
    if (j.contains("columns")) {
      const auto& c = j["columns"];
      auto& cols = src.columns;
      cols.start_ts = c.value("start_ts", cols.start_ts);
      cols.start_lat = c.value("start_lat", cols.start_lat);
      cols.start_lon = c.value("start_lon", cols.start_lon);
      cols.end_lat = c.value("end_lat", cols.end_lat);
      cols.end_lon = c.value("end_lon", cols.end_lon);
      cols.trip_km = c.value("trip_km", cols.trip_km);
      cols.driver_id = c.value("driver_id", cols.driver_id);
    }
    if (j.contains("seed")) {
      src.seed = j["seed"].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file field error: " + std::string(e.what()));
  }
}

std::vector<double> parse_axis(const std::string& csv, const char* name) {
  std::vector<double> out;
  std::string token;
  std::stringstream ss(csv);
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad value '") + token + "' for " + name);
    }
  }
  if (out.empty()) {
    throw ConfigError(std::string("empty value list for ") + name);
  }
  return out;
}

dispatchlab::RunSpec build_spec(const CommonOptions& o,
                                const std::string& batch_minutes,
                                const std::string& eta,
                                const std::string& lev_pct) {
  dispatchlab::RunSpec spec;
  spec.source.is_dataset = !o.dataset_path.empty();
  if (spec.source.is_dataset && o.synthetic) {
    throw ConfigError("--dataset and --synthetic are mutually exclusive");
  }
  spec.source.dataset_path = o.dataset_path;
  spec.source.distance_source = o.distance_source == "recorded"
                                    ? dispatchlab::DistanceSource::recorded
                                    : dispatchlab::DistanceSource::geometric;
  spec.source.n_requests = o.requests;
  spec.source.n_drivers = o.drivers;
  spec.source.duration_s = o.duration_hours * 3600.0;
  spec.source.tile_width_km = o.tile_width_km;
  spec.source.seed = o.seed;
  if (!o.config_file.empty()) {
    apply_config_file(o.config_file, spec.source);
  }

  std::string token;
  std::stringstream ss(o.policies);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) {
      spec.policies.push_back(dispatchlab::policy_from_name(token));
    }
  }

  spec.config.gamma = o.gamma;
  spec.config.alpha = o.alpha;
  spec.config.speed_kmh = o.speed_kmh;
  spec.config.max_wait_s = o.max_wait_min * 60.0;
  spec.config.availability_window_s = o.availability_min * 60.0;
  spec.config.candidate_radius_km = o.radius_km;
  spec.config.circuity = o.circuity;
  spec.config.tora_e2d_threshold_g_per_km = o.tora_threshold;
  spec.config.laf_lambda = o.laf_lambda;
  spec.config.utility_mode = o.utility_mode == "paper"
                                 ? dispatchlab::UtilityMode::paper
                                 : dispatchlab::UtilityMode::derived;
  spec.config.fairness_scope = o.fairness_scope == "matched_only"
                                   ? dispatchlab::FairnessScope::matched_only
                                   : dispatchlab::FairnessScope::all_available;
  spec.config.seed = o.seed;
  if (!o.warm_start.empty()) {
    spec.config.warm_start = o.warm_start;
  }

  spec.batch_minutes_axis = parse_axis(batch_minutes, "--batch-minutes");
  spec.eta_axis = parse_axis(eta, "--eta");
  spec.lev_pct_axis = parse_axis(lev_pct, "--lev-pct");

  spec.out_dir = o.out_dir.empty() ? "runs" : o.out_dir;
  spec.workers = o.workers;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched ridesharing dispatch simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts;
  std::string run_batch = "5", run_eta = "0", run_lev = "0";
  std::string sweep_batch = "5", sweep_eta = "0", sweep_lev = "0";
  std::string manifest_path;

  CLI::App* run_cmd = app.add_subcommand("run", "Execute one scenario");
  add_common_flags(run_cmd, run_opts);
  run_cmd->add_option("--batch-minutes", run_batch, "Batch duration in minutes");
  run_cmd->add_option("--eta", run_eta, "Fairness weight in gCO2/km");
  run_cmd->add_option("--lev-pct", run_lev, "Electrification target percent");
  std::string scenario_out;
  run_cmd->add_option("--scenario-out", scenario_out,
                      "Write the generated scenario as structured text");
  run_cmd->add_option("--manifest", manifest_path,
                      "Replay a stored run manifest (other scenario flags are "
                      "ignored)");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Cartesian sweep over batch/eta/LEV axes");
  add_common_flags(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--batch-minutes", sweep_batch,
                        "Comma-separated batch durations in minutes");
  sweep_cmd->add_option("--eta", sweep_eta, "Comma-separated eta values");
  sweep_cmd->add_option("--lev-pct", sweep_lev,
                        "Comma-separated electrification targets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      if (!manifest_path.empty()) {
        return dispatchlab::cmd_replay(
            manifest_path, run_opts.out_dir.empty() ? "runs" : run_opts.out_dir);
      }
      dispatchlab::RunSpec spec = build_spec(run_opts, run_batch, run_eta, run_lev);
      if (spec.batch_minutes_axis.size() != 1 || spec.eta_axis.size() != 1 ||
          spec.lev_pct_axis.size() != 1) {
        throw ConfigError("run takes single values for --batch-minutes, --eta "
                          "and --lev-pct; use sweep for lists");
      }
      spec.config.batch_duration_s = spec.batch_minutes_axis[0] * 60.0;
      spec.config.eta_g_per_km = spec.eta_axis[0];
      spec.source.lev_pct = spec.lev_pct_axis[0];
      if (!scenario_out.empty()) {
        spec.scenario_out = scenario_out;
      }
      return dispatchlab::cmd_run(spec);
    }
    return dispatchlab::cmd_sweep(
        build_spec(sweep_opts, sweep_batch, sweep_eta, sweep_lev));
  } catch (const IoError& e) {
    std::cerr << "dispatch-lab: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "dispatch-lab: " << e.what() << "\n";
    return 2;
  }
}
