#pragma once

// Shared helpers for the unit and acceptance suites.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dispatchlab/assign.hpp"
#include "dispatchlab/geo.hpp"
#include "dispatchlab/ingest.hpp"
#include "dispatchlab/rng.hpp"
#include "dispatchlab/values.hpp"

namespace testsupport {

inline constexpr double kKmPerDegLat = 6371.0 * 3.14159265358979323846 / 180.0;

// Point exactly `km` north of `from` along the meridian; haversine of such a
// pair is exactly the arc length, which makes distances in tests exact.
inline dispatchlab::GeoPoint north_of(const dispatchlab::GeoPoint& from, double km) {
  return dispatchlab::GeoPoint(from.lat + km / kKmPerDegLat, from.lon);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dispatch_lab_test_" + tag + "_" + std::to_string(::getpid()) +
             "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RandomProblemOptions {
  std::size_t max_drivers = 6;
  std::size_t max_requests = 6;
  double eta_g_per_km = 0.0;
  bool random_values = true;
  dispatchlab::FairnessScope scope = dispatchlab::FairnessScope::all_available;
  double box_km = 6.0;
  double rate_lo = 63.35;
  double rate_hi = 340.0;
};

// Small random batch problems shared by the solver-oracle comparisons.
inline dispatchlab::BatchProblem random_problem(dispatchlab::Rng& rng,
                                                const RandomProblemOptions& opt) {
  using namespace dispatchlab;
  const GeoPoint origin(30.0, -97.8);
  const GridSpec grid(origin, 1.0);

  const auto rand_point = [&] {
    return offset_point(origin, rng.uniform(0.0, opt.box_km),
                        rng.uniform(0.0, opt.box_km));
  };

  const std::size_t n_d = 1 + rng.uniform_index(opt.max_drivers);
  const std::size_t n_r = 1 + rng.uniform_index(opt.max_requests);

  std::vector<BatchDriver> drivers;
  for (std::size_t i = 0; i < n_d; ++i) {
    drivers.push_back(BatchDriver{"d" + std::to_string(10 + i), rand_point(),
                                  rng.uniform(opt.rate_lo, opt.rate_hi),
                                  rng.uniform(0.0, 50.0), 0.0});
  }
  std::vector<RideRequest> requests;
  double t = 0.0;
  for (std::size_t i = 0; i < n_r; ++i) {
    RideRequest r;
    r.id = "r" + std::to_string(10 + i);
    r.pickup = rand_point();
    r.dropoff = rand_point();
    r.trip_km = haversine_km(r.pickup, r.dropoff);
    t += rng.uniform(0.0, 30.0);
    r.request_time_s = t;
    requests.push_back(std::move(r));
  }

  ValueTable table(0.9, 0.025);
  if (opt.random_values) {
    const int tiles = static_cast<int>(opt.box_km) + 1;
    for (int c = 0; c < tiles; ++c) {
      for (int w = 0; w < tiles; ++w) {
        table.set(TileId{c, w}, rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0));
      }
    }
  }

  BatchBuildOptions build;
  build.eta_g_per_km = opt.eta_g_per_km;
  build.candidate_radius_km = 1e9;  // dense
  build.fairness_scope = opt.scope;
  return build_batch_problem(std::move(drivers), std::move(requests), grid,
                             table, build);
}

}  // namespace testsupport
