#include "dispatchlab/ingest.hpp"

#include <algorithm>
#include <set>

#include <doctest.h>

#include "dispatchlab/errors.hpp"
#include "support.hpp"

using namespace dispatchlab;
using testsupport::TempDir;
using testsupport::kKmPerDegLat;
using testsupport::write_file;

TEST_CASE("vehicle_class: thresholds are strict") {
  CHECK(vehicle_class(63.35) == VehicleClass::LEV);
  CHECK(vehicle_class(134.99) == VehicleClass::LEV);
  CHECK(vehicle_class(135.0) == VehicleClass::MID);
  CHECK(vehicle_class(200.0) == VehicleClass::MID);
  CHECK(vehicle_class(270.0) == VehicleClass::MID);
  CHECK(vehicle_class(270.01) == VehicleClass::HEV);
}

TEST_CASE("load_trips: header-only file yields an empty clean log") {
  TempDir dir("trips_empty");
  const auto path = dir.path() / "log.csv";
  write_file(path, "start_ts,start_lat,start_lon,end_lat,end_lon,trip_km\n");
  const TripLog log = load_trips(path, DistanceSource::recorded);
  CHECK(log.requests.empty());
  CHECK(log.dropped_rows == 0);
}

TEST_CASE("load_trips: rows with missing coordinates are dropped and counted") {
  TempDir dir("trips_drop");
  const auto path = dir.path() / "log.csv";
  write_file(path,
             "start_ts,start_lat,start_lon,end_lat,end_lon,trip_km\n"
             "100,30.1,-97.8,30.2,-97.7,2.5\n"
             "200,30.1,-97.8,,-97.7,2.5\n"
             "300,30.1,-97.8,30.3,-97.6,1.5\n"
             "400,30.2,-97.8,30.2,-97.9,3.5\n");
  const TripLog log = load_trips(path, DistanceSource::recorded);
  CHECK(log.requests.size() == 3);
  CHECK(log.dropped_rows == 1);
}

TEST_CASE("load_trips: geometric source recomputes the distance") {
  TempDir dir("trips_geom");
  const auto path = dir.path() / "log.csv";
  // meridian pair exactly 8 km apart, recorded distance says 10
  const double lat2 = 30.1 + 8.0 / kKmPerDegLat;
  char lat2_text[40];
  std::snprintf(lat2_text, sizeof(lat2_text), "%.17g", lat2);
  write_file(path, "start_ts,start_lat,start_lon,end_lat,end_lon,trip_km\n"
                   "100,30.1,-97.8," + std::string(lat2_text) + ",-97.8,10.0\n");
  const TripLog geometric = load_trips(path, DistanceSource::geometric);
  REQUIRE(geometric.requests.size() == 1);
  CHECK(geometric.requests[0].trip_km == doctest::Approx(8.0).epsilon(1e-9));

  const TripLog recorded = load_trips(path, DistanceSource::recorded);
  CHECK(recorded.requests[0].trip_km == doctest::Approx(10.0));
}

TEST_CASE("load_trips: rebases and sorts times, accepts ISO-8601 and epoch") {
  TempDir dir("trips_time");
  const auto path = dir.path() / "log.csv";
  write_file(path,
             "start_ts,start_lat,start_lon,end_lat,end_lon\n"
             "2016-12-01T00:10:00Z,30.1,-97.8,30.2,-97.7\n"
             "2016-12-01 00:05:00,30.1,-97.8,30.2,-97.7\n"
             "2016-12-01T00:00:30+00:00,30.1,-97.8,30.2,-97.7\n");
  const TripLog log = load_trips(path, DistanceSource::geometric);
  REQUIRE(log.requests.size() == 3);
  CHECK(log.requests[0].request_time_s == 0.0);
  CHECK(log.requests[1].request_time_s == doctest::Approx(270.0));
  CHECK(log.requests[2].request_time_s == doctest::Approx(570.0));
  CHECK(std::is_sorted(log.requests.begin(), log.requests.end(),
                       [](const RideRequest& a, const RideRequest& b) {
                         return a.request_time_s < b.request_time_s;
                       }));
}

TEST_CASE("load_trips: non-positive recorded distances and bad rows are dropped") {
  TempDir dir("trips_bad");
  const auto path = dir.path() / "log.csv";
  write_file(path,
             "start_ts,start_lat,start_lon,end_lat,end_lon,trip_km\n"
             "100,30.1,-97.8,30.2,-97.7,0.0\n"      // non-positive distance
             "nonsense,30.1,-97.8,30.2,-97.7,2.0\n" // bad timestamp
             "300,95.0,-97.8,30.2,-97.7,2.0\n"      // latitude out of range
             "400,30.1,-97.8,30.2,-97.7\n"          // ragged row
             "500,30.1,-97.8,30.2,-97.7,2.0\n");
  const TripLog log = load_trips(path, DistanceSource::recorded);
  CHECK(log.requests.size() == 1);
  CHECK(log.dropped_rows == 4);
}

TEST_CASE("load_trips: errors name the missing column or unreadable file") {
  TempDir dir("trips_err");
  const auto path = dir.path() / "log.csv";
  write_file(path, "start_ts,start_lon,end_lat,end_lon\nx\n");
  CHECK_THROWS_WITH_AS(load_trips(path, DistanceSource::geometric),
                       doctest::Contains("start_lat"), SchemaError);
  CHECK_THROWS_AS(load_trips(dir.path() / "missing.csv", DistanceSource::geometric),
                  IoError);
}

TEST_CASE("load_trips: custom column mapping and driver ids") {
  TempDir dir("trips_cols");
  const auto path = dir.path() / "log.csv";
  write_file(path,
             "ts,plat,plon,qlat,qlon,who\n"
             "10,30.1,-97.8,30.2,-97.7,alice\n"
             "20,30.1,-97.8,30.2,-97.7,bob\n");
  TripLogColumns cols;
  cols.start_ts = "ts";
  cols.start_lat = "plat";
  cols.start_lon = "plon";
  cols.end_lat = "qlat";
  cols.end_lon = "qlon";
  cols.driver_id = "who";
  const TripLog log = load_trips(path, DistanceSource::geometric, cols);
  REQUIRE(log.requests.size() == 2);
  CHECK(log.has_driver_ids);
  CHECK(log.driver_ids[0] == "alice");
  CHECK(log.driver_ids[1] == "bob");
}

TEST_CASE("build_fleet: deterministic for a fixed seed") {
  const BoundingBox box{GeoPoint(30.0, -98.0), GeoPoint(30.2, -97.8)};
  const auto a = build_fleet(150, FleetProfile::default_mixed(), box, 99);
  const auto b = build_fleet(150, FleetProfile::default_mixed(), box, 99);
  REQUIRE(a.size() == 150);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].emission_g_per_km == b[i].emission_g_per_km);
    CHECK(a[i].initial_location == b[i].initial_location);
  }
}

TEST_CASE("build_fleet: point mass profile gives a single class") {
  const BoundingBox box{GeoPoint(30.0, -98.0), GeoPoint(30.2, -97.8)};
  const FleetProfile point{{{"MID", 200.0, 1.0}}};
  for (const auto& d : build_fleet(50, point, box, 3)) {
    CHECK(d.cls() == VehicleClass::MID);
  }
}

TEST_CASE("build_fleet: two-point profile concentrates near its weights") {
  const BoundingBox box{GeoPoint(30.0, -98.0), GeoPoint(30.2, -97.8)};
  const FleetProfile half{{{"low", 120.0, 0.5}, {"high", 300.0, 0.5}}};
  const auto fleet = build_fleet(1000, half, box, 7);
  const auto levs = std::count_if(fleet.begin(), fleet.end(), [](const DriverSpec& d) {
    return d.cls() == VehicleClass::LEV;
  });
  CHECK(levs >= 450);
  CHECK(levs <= 550);
}

TEST_CASE("build_fleet: validation errors") {
  const BoundingBox box{GeoPoint(30.0, -98.0), GeoPoint(30.2, -97.8)};
  CHECK_THROWS_AS(build_fleet(0, FleetProfile::default_mixed(), box, 1), ConfigError);
  CHECK_THROWS_AS(build_fleet(5, FleetProfile{}, box, 1), ConfigError);
  const FleetProfile zero_weight{{{"x", 100.0, 0.0}}};
  CHECK_THROWS_AS(build_fleet(5, zero_weight, box, 1), ConfigError);
}

TEST_CASE("electrify: reaching the target converts exactly enough drivers") {
  const BoundingBox box{GeoPoint(30.0, -98.0), GeoPoint(30.2, -97.8)};
  const FleetProfile all_mid{{{"MID", 200.0, 1.0}}};
  const auto fleet = build_fleet(100, all_mid, box, 5);

  const auto electrified = electrify(fleet, 25.0, 11);
  const auto evs = std::count_if(electrified.begin(), electrified.end(),
                                 [](const DriverSpec& d) {
                                   return d.emission_g_per_km == kEvGPerKm;
                                 });
  CHECK(evs == 25);

  // determinism: the same seed converts the same set
  const auto again = electrify(fleet, 25.0, 11);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    CHECK(electrified[i].emission_g_per_km == again[i].emission_g_per_km);
  }
}

TEST_CASE("electrify: no-op at the current share, never touches LEVs") {
  const BoundingBox box{GeoPoint(30.0, -98.0), GeoPoint(30.2, -97.8)};
  const FleetProfile half{{{"low", 100.0, 0.5}, {"high", 300.0, 0.5}}};
  const auto fleet = build_fleet(40, half, box, 9);
  const auto lev_count = std::count_if(fleet.begin(), fleet.end(), [](const DriverSpec& d) {
    return d.cls() == VehicleClass::LEV;
  });
  const double current_pct = 100.0 * static_cast<double>(lev_count) / 40.0;

  const auto unchanged = electrify(fleet, current_pct, 77);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    CHECK(unchanged[i].emission_g_per_km == fleet[i].emission_g_per_km);
  }

  const auto raised = electrify(fleet, 75.0, 77);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    if (fleet[i].cls() == VehicleClass::LEV) {
      CHECK(raised[i].emission_g_per_km == fleet[i].emission_g_per_km);
    }
  }

  CHECK_THROWS_AS(electrify(fleet, current_pct - 10.0, 1), ConfigError);
}

TEST_CASE("synth_scenario: zero requests is a valid empty scenario") {
  SynthParams params;
  params.n_requests = 0;
  params.n_drivers = 3;
  params.seed = 4;
  const Scenario s = synth_scenario(params);
  CHECK(s.requests.empty());
  CHECK(s.fleet.size() == 3);
}

TEST_CASE("synth_scenario: identical seeds give byte-identical serializations") {
  SynthParams params;
  params.n_requests = 120;
  params.n_drivers = 8;
  params.seed = 31;
  const std::string a = serialize_scenario(synth_scenario(params));
  const std::string b = serialize_scenario(synth_scenario(params));
  CHECK(a == b);

  params.seed = 32;
  CHECK(serialize_scenario(synth_scenario(params)) != a);
}

TEST_CASE("synth_scenario: requests are time-sorted with unique ids") {
  SynthParams params;
  params.n_requests = 300;
  params.n_drivers = 5;
  params.seed = 8;
  const Scenario s = synth_scenario(params);
  REQUIRE(s.requests.size() == 300);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.requests.size(); ++i) {
    ids.insert(s.requests[i].id);
    if (i > 0) {
      CHECK(s.requests[i].request_time_s >= s.requests[i - 1].request_time_s);
    }
  }
  CHECK(ids.size() == 300);
}

TEST_CASE("synth_scenario: a lone hotspot concentrates pickups") {
  const BoundingBox area{GeoPoint(30.0, -98.0),
                         offset_point(GeoPoint(30.0, -98.0), 12.0, 12.0)};
  const GeoPoint center = offset_point(area.sw, 6.5, 6.5);  // tile (6,6) center
  SynthParams params;
  params.n_requests = 1000;
  params.n_drivers = 2;
  params.area = area;
  params.hotspots = HotspotConfig{{Hotspot{center, 1.0, 1.0}}, 0.0};
  params.seed = 17;
  const Scenario s = synth_scenario(params);

  const TileId hot = tile_of(center, s.grid);
  std::size_t close = 0;
  for (const auto& r : s.requests) {
    const TileId t = tile_of(r.pickup, s.grid);
    if (std::abs(t.col - hot.col) <= 2 && std::abs(t.row - hot.row) <= 2) ++close;
  }
  CHECK(close >= 900);
}

TEST_CASE("scenario serialization round-trips") {
  SynthParams params;
  params.n_requests = 40;
  params.n_drivers = 4;
  params.seed = 12;
  const Scenario s = synth_scenario(params);
  const std::string text = serialize_scenario(s);
  const Scenario back = parse_scenario(text);
  CHECK(serialize_scenario(back) == text);
  CHECK(back.requests.size() == s.requests.size());
  CHECK(back.fleet.size() == s.fleet.size());
  CHECK(back.grid == s.grid);
  CHECK(back.seed == s.seed);
}

TEST_CASE("fleet_from_trip_log: driver ids seed at their first observed pickup") {
  TripLog log;
  log.has_driver_ids = true;
  for (int i = 0; i < 4; ++i) {
    RideRequest r;
    r.id = "r" + std::to_string(i);
    r.pickup = GeoPoint(30.1 + 0.01 * i, -97.8);
    r.dropoff = GeoPoint(30.2, -97.7);
    r.request_time_s = 10.0 * i;
    r.trip_km = 2.0;
    log.requests.push_back(std::move(r));
  }
  log.driver_ids = {"a", "b", "a", "c"};

  const auto fleet = fleet_from_trip_log(log, FleetProfile::default_mixed(), 9, 3);
  REQUIRE(fleet.size() == 3);
  CHECK(fleet[0].id == "a");
  CHECK(fleet[0].initial_location == log.requests[0].pickup);
  CHECK(fleet[1].id == "b");
  CHECK(fleet[1].initial_location == log.requests[1].pickup);
  CHECK(fleet[2].id == "c");
  CHECK(fleet[2].initial_location == log.requests[3].pickup);
}

TEST_CASE("fleet_from_trip_log: falls back to a uniform fleet without ids") {
  TripLog log;
  log.has_driver_ids = false;
  RideRequest r;
  r.id = "r0";
  r.pickup = GeoPoint(30.1, -97.8);
  r.dropoff = GeoPoint(30.2, -97.7);
  r.trip_km = 2.0;
  log.requests.push_back(r);
  log.driver_ids.push_back("");

  const auto fleet = fleet_from_trip_log(log, FleetProfile::default_mixed(), 7, 3);
  CHECK(fleet.size() == 7);
}
