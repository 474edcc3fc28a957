#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dispatchlab/geo.hpp"

namespace dispatchlab {

// Vehicle class thresholds in gCO2/km.
inline constexpr double kLevMaxGPerKm = 135.0;
inline constexpr double kHevMinGPerKm = 270.0;
// Emission intensity assigned to converted electric vehicles.
inline constexpr double kEvGPerKm = 63.35;

enum class VehicleClass { LEV, MID, HEV };

// Class label is a pure function of the emission rate: LEV below 135,
// HEV above 270, MID between.
VehicleClass vehicle_class(double emission_g_per_km);
std::string_view to_string(VehicleClass c);

struct RideRequest {
  std::string id;
  GeoPoint pickup;
  GeoPoint dropoff;
  double request_time_s = 0.0;  // seconds since scenario start
  double trip_km = 0.0;         // pickup-to-dropoff distance
};

struct DriverSpec {
  std::string id;
  GeoPoint initial_location;
  double emission_g_per_km = 0.0;

  VehicleClass cls() const { return vehicle_class(emission_g_per_km); }
};

struct BoundingBox {
  GeoPoint sw;
  GeoPoint ne;

  bool contains(const GeoPoint& p) const {
    return p.lat >= sw.lat && p.lat <= ne.lat && p.lon >= sw.lon &&
           p.lon <= ne.lon;
  }
};

struct Scenario {
  std::vector<RideRequest> requests;  // sorted by request_time
  std::vector<DriverSpec> fleet;      // non-empty
  GridSpec grid;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Trip-log loading

enum class DistanceSource { recorded, geometric };

// Column-name mapping for comma-separated trip logs. `trip_km` is required
// only for DistanceSource::recorded; `driver_id` is always optional.
struct TripLogColumns {
  std::string start_ts = "start_ts";
  std::string start_lat = "start_lat";
  std::string start_lon = "start_lon";
  std::string end_lat = "end_lat";
  std::string end_lon = "end_lon";
  std::string trip_km = "trip_km";
  std::string driver_id = "driver_id";
};

struct TripLog {
  std::vector<RideRequest> requests;    // time-sorted, rebased to t=0
  std::vector<std::string> driver_ids;  // aligned with requests; empty strings
                                        // when the column is absent
  bool has_driver_ids = false;
  std::size_t dropped_rows = 0;
};

// Loads a headered comma-separated trip log. Rows with missing or invalid
// coordinates, unparsable timestamps, or non-positive trip distance are
// dropped and counted. Timestamps accept epoch seconds or ISO-8601; output
// times are rebased so the earliest request is 0.
TripLog load_trips(const std::filesystem::path& path, DistanceSource source,
                   const TripLogColumns& columns = {});

// ---------------------------------------------------------------------------
// Fleet synthesis

struct FleetClassSpec {
  std::string name;
  double g_per_km = 0.0;        // class center
  double weight = 0.0;
  double half_width_g_per_km = 0.0;  // uniform jitter around the center
};

struct FleetProfile {
  std::vector<FleetClassSpec> classes;

  // EV/LEV/MID/HEV mix used when no profile is configured.
  static FleetProfile default_mixed();
};

// Deterministic fleet: emission rates drawn from the profile's weighted class
// table, initial locations uniform over the spawn box.
std::vector<DriverSpec> build_fleet(int n_drivers, const FleetProfile& profile,
                                    const BoundingBox& spawn_region,
                                    std::uint64_t seed);

// Converts randomly chosen non-LEV drivers to the EV rate until the LEV share
// reaches target_lev_pct (within one driver). Drivers already below the LEV
// threshold are never touched.
std::vector<DriverSpec> electrify(std::vector<DriverSpec> fleet,
                                  double target_lev_pct, std::uint64_t seed);

// Fleet for a dataset run: when the log carries driver ids, one driver per
// distinct id seeded at the pickup of that driver's first trip; otherwise
// n_fallback_drivers spawned uniformly over the request bounding box.
std::vector<DriverSpec> fleet_from_trip_log(const TripLog& log,
                                            const FleetProfile& profile,
                                            int n_fallback_drivers,
                                            std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic scenarios

struct Hotspot {
  GeoPoint center;
  double weight = 1.0;
  double sigma_km = 1.0;  // isotropic Gaussian spread
};

struct HotspotConfig {
  std::vector<Hotspot> hotspots;
  double uniform_weight = 0.0;  // weight of the uniform background component

  static HotspotConfig default_city(const BoundingBox& area);
};

struct SynthParams {
  int n_requests = 2000;
  int n_drivers = 20;
  double duration_s = 86400.0;
  HotspotConfig hotspots;       // empty -> default_city(area)
  FleetProfile profile;         // empty -> default_mixed()
  BoundingBox area;             // zero box -> default service area
  double tile_width_km = 1.0;
  std::uint64_t seed = 0;
};

// Default synthetic service area (a square box) when none is configured.
BoundingBox default_service_area();

// Request times are order statistics of uniforms over the duration (a Poisson
// arrival process conditioned on the count); pickups and dropoffs are drawn
// from the hotspot mixture. Deterministic per seed.
Scenario synth_scenario(const SynthParams& params);
Scenario synth_scenario(int n_requests, int n_drivers, double duration_s,
                        const HotspotConfig& hotspots, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scenario utilities

BoundingBox bounding_box_of(const std::vector<RideRequest>& requests);

// Grid anchored just southwest of the box so every point tiles in-area.
GridSpec grid_for(const BoundingBox& box, double tile_width_km = 1.0);

// Deterministic structured-text dump for replay, and its inverse.
std::string serialize_scenario(const Scenario& s);
Scenario parse_scenario(const std::string& text);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace dispatchlab
