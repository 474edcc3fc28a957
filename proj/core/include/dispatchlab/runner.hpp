#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dispatchlab/ingest.hpp"
#include "dispatchlab/metrics.hpp"
#include "dispatchlab/sim.hpp"

namespace dispatchlab {

inline constexpr std::string_view kToolName = "dispatch-lab";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Where a run's trips come from: a synthetic generator or a dataset file.
struct ScenarioSource {
  bool is_dataset = false;

  // dataset
  std::filesystem::path dataset_path;
  DistanceSource distance_source = DistanceSource::geometric;
  TripLogColumns columns;

  // synthetic
  int n_requests = 2000;
  double duration_s = 86400.0;
  HotspotConfig hotspots;  // empty -> default city layout
  BoundingBox area;        // zero box -> default service area

  // shared
  int n_drivers = 20;      // synthetic fleet size / dataset fallback
  FleetProfile profile;    // empty -> default mixed profile
  double tile_width_km = 1.0;
  double lev_pct = 0.0;    // electrification target; 0 leaves the fleet as-is
  std::uint64_t seed = 0;
};

// Fills defaulted fields (area, hotspots, profile) so manifests echo the
// concrete values a run used.
ScenarioSource resolve_source(ScenarioSource source);

Scenario make_scenario(const ScenarioSource& source);

struct SingleRun {
  ScenarioSource source;
  PolicyKind policy = PolicyKind::LEAD;
  SimConfig config;
};

// Canonical manifest document for one run. Contains everything needed to
// reproduce it byte-for-byte (and no output paths or timestamps).
std::string manifest_json(const SingleRun& run, const std::string& scenario_fingerprint);
SingleRun parse_manifest(const std::string& text);
SingleRun load_manifest(const std::filesystem::path& path);

// FNV-1a 64 of a string, as 16 hex chars; keys run directories.
std::string fingerprint(const std::string& text);

// Executes one run against a prebuilt scenario and writes
// <out_root>/<policy>/<hash>/{trips.csv,drivers.csv,metrics.csv,values.csv,
// manifest.json}. Returns the run's metrics.
MetricsReport execute_single(const SingleRun& run, const Scenario& scenario,
                             const std::filesystem::path& out_root);

struct RunSpec {
  ScenarioSource source;
  std::vector<PolicyKind> policies;
  SimConfig config;
  std::vector<double> batch_minutes_axis;  // sweep axes
  std::vector<double> eta_axis;
  std::vector<double> lev_pct_axis;
  std::filesystem::path out_dir = "runs";
  int workers = 1;
  std::filesystem::path scenario_out;  // optional deterministic scenario dump
};

// One scenario, one run per policy. Returns a process exit status:
// 0 success, 2 invalid configuration, 3 I/O failure.
int cmd_run(const RunSpec& spec);

// Cartesian product of the axes times the policy list; emits
// <out>/sweep.csv and <out>/summary.json on top of the per-run exports.
int cmd_sweep(const RunSpec& spec);

// Re-executes a stored manifest into out_root. Same exit conventions.
int cmd_replay(const std::filesystem::path& manifest_path,
               const std::filesystem::path& out_root);

}  // namespace dispatchlab
