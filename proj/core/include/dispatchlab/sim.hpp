#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dispatchlab/assign.hpp"
#include "dispatchlab/baselines.hpp"
#include "dispatchlab/ingest.hpp"
#include "dispatchlab/values.hpp"

namespace dispatchlab {

struct SimConfig {
  double batch_duration_s = 300.0;
  double eta_g_per_km = 0.0;
  double gamma = 0.9;
  double alpha = 0.025;
  double speed_kmh = 30.0;
  double max_wait_s = 900.0;
  double availability_window_s = 900.0;
  double candidate_radius_km = 8.0;
  double circuity = 1.0;
  double tora_e2d_threshold_g_per_km = 100.0;
  double laf_lambda = 1.0;
  UtilityMode utility_mode = UtilityMode::derived;
  FairnessScope fairness_scope = FairnessScope::all_available;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> warm_start;  // value-table snapshot

  void validate() const;
};

struct DriverRuntime {
  DriverSpec spec;
  GeoPoint location;
  double cumulative_utility_km = 0.0;
  double busy_until_s = 0.0;
  int trips_served = 0;
};

struct TripRecord {
  std::string request_id;
  std::string driver_id;
  double request_time_s = 0.0;
  double assign_time_s = 0.0;   // batch close
  double depart_time_s = 0.0;   // max(assign, previous busy_until)
  double pickup_time_s = 0.0;
  double dropoff_time_s = 0.0;
  double deadhead_km = 0.0;
  double trip_km = 0.0;
  double emission_g = 0.0;      // (deadhead + trip) * e_v
  double wait_s = 0.0;          // (depart - request) + deadhead travel time
};

struct DroppedRequest {
  std::string request_id;
  double request_time_s = 0.0;
  double dropped_time_s = 0.0;
  std::string reason;
};

struct SimResult {
  std::vector<TripRecord> trips;
  std::vector<DroppedRequest> dropped;
  std::vector<DriverRuntime> final_drivers;
  ValueTable value_table;
  std::size_t request_count = 0;
  std::size_t pending_at_end = 0;
};

// Indices into the pool of drivers assignable at this batch close: idle, or
// finishing within the availability window (those depart from their upcoming
// dropoff once free).
std::vector<std::size_t> available_drivers(const std::vector<DriverRuntime>& pool,
                                           double batch_close_s,
                                           const SimConfig& cfg);

// Runs one trip at constant speed and commits its effects on the driver.
// Throws ContractViolation when the driver is not assignable at assign_time.
TripRecord execute_trip(DriverRuntime& d, const RideRequest& r,
                        double assign_time_s, const SimConfig& cfg);

// Batched dispatch loop: collect pending requests, form the available pool,
// apply the overflow rule, invoke the policy, execute matches, commit TD
// updates (LEAD and LAF), drop requests that outwaited max_wait_s.
// Deterministic per (scenario, policy, cfg).
SimResult run(const Scenario& scenario, PolicyKind policy, const SimConfig& cfg);

// Recomputed-identity checks: per-trip emission, per-driver utility, trip
// overlap, wait composition, and count conservation. Empty when clean.
std::vector<std::string> bookkeeping_violations(const SimResult& result,
                                                const Scenario& scenario,
                                                const SimConfig& cfg);

// Byte-stable exports (headered comma-separated text).
void export_trips_csv(const SimResult& result, const std::filesystem::path& path);
void export_drivers_csv(const SimResult& result, const std::filesystem::path& path);

}  // namespace dispatchlab
