#include "dispatchlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "dispatchlab/errors.hpp"
#include "text_util.hpp"

namespace dispatchlab {

namespace {

double travel_time_s(double distance_km, double speed_kmh) {
  return distance_km / speed_kmh * 3600.0;
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(name) + " must be positive");
  }
}

}  // namespace

void SimConfig::validate() const {
  check_positive(batch_duration_s, "batch_duration_s");
  check_positive(speed_kmh, "speed_kmh");
  check_positive(max_wait_s, "max_wait_s");
  check_positive(candidate_radius_km, "candidate_radius_km");
  if (availability_window_s < 0.0 || !std::isfinite(availability_window_s)) {
    throw ConfigError("availability_window_s must be non-negative");
  }
  if (eta_g_per_km < 0.0 || !std::isfinite(eta_g_per_km)) {
    throw ConfigError("eta_g_per_km must be non-negative");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must lie in [0, 1]");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1]");
  }
  if (!(circuity >= 1.0)) {
    throw ConfigError("circuity must be at least 1.0");
  }
  if (tora_e2d_threshold_g_per_km < 0.0) {
    throw ConfigError("tora_e2d_threshold_g_per_km must be non-negative");
  }
  if (laf_lambda < 0.0 || !std::isfinite(laf_lambda)) {
    throw ConfigError("laf_lambda must be non-negative");
  }
}

std::vector<std::size_t> available_drivers(const std::vector<DriverRuntime>& pool,
                                           double batch_close_s,
                                           const SimConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].busy_until_s <= batch_close_s + cfg.availability_window_s) {
      out.push_back(i);
    }
  }
  return out;
}

TripRecord execute_trip(DriverRuntime& d, const RideRequest& r,
                        double assign_time_s, const SimConfig& cfg) {
  if (d.busy_until_s > assign_time_s + cfg.availability_window_s) {
    throw ContractViolation("driver " + d.spec.id + " is busy until " +
                            std::to_string(d.busy_until_s) +
                            " and not assignable at " +
                            std::to_string(assign_time_s));
  }
  const double dh = deadhead_km(d.location, r.pickup, cfg.circuity);
  const double depart = std::max(assign_time_s, d.busy_until_s);
  const double dh_travel = travel_time_s(dh, cfg.speed_kmh);
  const double pickup = depart + dh_travel;
  const double dropoff = pickup + travel_time_s(r.trip_km, cfg.speed_kmh);

  TripRecord rec;
  rec.request_id = r.id;
  rec.driver_id = d.spec.id;
  rec.request_time_s = r.request_time_s;
  rec.assign_time_s = assign_time_s;
  rec.depart_time_s = depart;
  rec.pickup_time_s = pickup;
  rec.dropoff_time_s = dropoff;
  rec.deadhead_km = dh;
  rec.trip_km = r.trip_km;
  rec.emission_g = (dh + r.trip_km) * d.spec.emission_g_per_km;
  rec.wait_s = (depart - r.request_time_s) + dh_travel;

  d.location = r.dropoff;
  d.busy_until_s = dropoff;
  d.cumulative_utility_km += r.trip_km - dh;
  d.trips_served += 1;
  return rec;
}

SimResult run(const Scenario& scenario, PolicyKind policy, const SimConfig& cfg) {
  cfg.validate();
  if (scenario.fleet.empty()) {
    throw ConfigError("scenario fleet is empty");
  }
  for (std::size_t i = 1; i < scenario.requests.size(); ++i) {
    if (scenario.requests[i].request_time_s < scenario.requests[i - 1].request_time_s) {
      throw ConfigError("scenario requests are not sorted by request time");
    }
  }
  try {
    for (const auto& r : scenario.requests) {
      tile_of(r.pickup, scenario.grid);
      tile_of(r.dropoff, scenario.grid);
    }
    for (const auto& d : scenario.fleet) {
      tile_of(d.initial_location, scenario.grid);
    }
  } catch (const OutOfAreaError& e) {
    throw ConfigError(std::string("scenario/grid mismatch: ") + e.what());
  }

  std::vector<DriverRuntime> drivers;
  drivers.reserve(scenario.fleet.size());
  for (const auto& spec : scenario.fleet) {
    drivers.push_back(DriverRuntime{spec, spec.initial_location, 0.0, 0.0, 0});
  }
  std::unordered_map<std::string, std::size_t> driver_index;
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    driver_index.emplace(drivers[i].spec.id, i);
  }

  ValueTable table = cfg.warm_start
                         ? ValueTable::load(*cfg.warm_start, cfg.gamma, cfg.alpha)
                         : ValueTable(cfg.gamma, cfg.alpha);
  LafValueTable laf_values(cfg.gamma, cfg.alpha);

  const BatchBuildOptions build_options{cfg.eta_g_per_km, cfg.circuity,
                                        cfg.candidate_radius_km, cfg.utility_mode,
                                        cfg.fairness_scope};

  SimResult out;
  out.request_count = scenario.requests.size();

  std::vector<RideRequest> pending;
  std::size_t next_request = 0;
  std::size_t resolved = 0;
  double batch_close = 0.0;

  while (resolved < scenario.requests.size()) {
    batch_close += cfg.batch_duration_s;
    while (next_request < scenario.requests.size() &&
           scenario.requests[next_request].request_time_s <= batch_close) {
      pending.push_back(scenario.requests[next_request++]);
    }

    const auto pool = available_drivers(drivers, batch_close, cfg);
    auto [head, deferred] = overflow_split(std::move(pending), pool.size());

    std::vector<RideRequest> unmatched;
    if (!head.empty() && !pool.empty()) {
      std::vector<BatchDriver> batch_drivers;
      batch_drivers.reserve(pool.size());
      for (const std::size_t i : pool) {
        batch_drivers.push_back(BatchDriver{drivers[i].spec.id,
                                            drivers[i].location,
                                            drivers[i].spec.emission_g_per_km,
                                            drivers[i].cumulative_utility_km,
                                            drivers[i].busy_until_s});
      }
      const BatchProblem problem = build_batch_problem(
          std::move(batch_drivers), head, scenario.grid, table, build_options);

      Matching matching;
      switch (policy) {
        case PolicyKind::LEAD:
          matching = solve_batch(problem);
          break;
        case PolicyKind::CD:
          matching = assign_cd(problem);
          break;
        case PolicyKind::TORA:
          matching = assign_tora(problem, cfg.tora_e2d_threshold_g_per_km);
          break;
        case PolicyKind::LAF:
          matching = assign_laf(problem, laf_values, cfg.laf_lambda);
          break;
      }

      std::unordered_map<std::string, std::string> request_to_driver;
      for (const auto& [driver_id, request_id] : matching.pairs) {
        request_to_driver.emplace(request_id, driver_id);
      }

      for (const auto& request : head) {
        const auto it = request_to_driver.find(request.id);
        if (it == request_to_driver.end()) {
          unmatched.push_back(request);
          continue;
        }
        DriverRuntime& d = drivers[driver_index.at(it->second)];
        const TileId from = tile_of(d.location, scenario.grid);
        const TileId to = tile_of(request.dropoff, scenario.grid);
        TripRecord rec = execute_trip(d, request, batch_close, cfg);
        if (policy == PolicyKind::LEAD) {
          table.td_update(Transition{from, to, rec.deadhead_km, rec.trip_km});
        } else if (policy == PolicyKind::LAF) {
          laf_values.update(from, to, rec.trip_km - rec.deadhead_km);
        }
        out.trips.push_back(std::move(rec));
        ++resolved;
      }
    } else {
      unmatched = std::move(head);
    }

    pending = std::move(unmatched);
    pending.insert(pending.end(), std::make_move_iterator(deferred.begin()),
                   std::make_move_iterator(deferred.end()));

    std::vector<RideRequest> still_waiting;
    still_waiting.reserve(pending.size());
    for (auto& r : pending) {
      if (batch_close - r.request_time_s > cfg.max_wait_s) {
        out.dropped.push_back(DroppedRequest{r.id, r.request_time_s, batch_close,
                                             "wait_exceeded"});
        ++resolved;
      } else {
        still_waiting.push_back(std::move(r));
      }
    }
    pending = std::move(still_waiting);
  }

  out.pending_at_end = pending.size();
  out.final_drivers = std::move(drivers);
  out.value_table = std::move(table);
  return out;
}

std::vector<std::string> bookkeeping_violations(const SimResult& result,
                                                const Scenario& scenario,
                                                const SimConfig& cfg) {
  std::vector<std::string> problems;
  const auto relative_close = [](double a, double b) {
    return std::fabs(a - b) <= 1e-6 * std::max({1.0, std::fabs(a), std::fabs(b)});
  };

  std::unordered_map<std::string, double> rates;
  for (const auto& d : scenario.fleet) {
    rates.emplace(d.id, d.emission_g_per_km);
  }

  std::unordered_map<std::string, double> utility_sum;
  std::unordered_map<std::string, std::vector<const TripRecord*>> by_driver;
  for (const auto& t : result.trips) {
    const auto rate = rates.find(t.driver_id);
    if (rate == rates.end()) {
      problems.push_back("trip " + t.request_id + " served by unknown driver " +
                         t.driver_id);
      continue;
    }
    if (!relative_close(t.emission_g, (t.deadhead_km + t.trip_km) * rate->second)) {
      problems.push_back("emission identity broken for trip " + t.request_id);
    }
    const double expected_wait =
        (t.depart_time_s - t.request_time_s) +
        t.deadhead_km / cfg.speed_kmh * 3600.0;
    if (t.wait_s != expected_wait) {
      problems.push_back("wait decomposition broken for trip " + t.request_id);
    }
    utility_sum[t.driver_id] += t.trip_km - t.deadhead_km;
    by_driver[t.driver_id].push_back(&t);
  }

  for (const auto& d : result.final_drivers) {
    const double expected = utility_sum.count(d.spec.id) ? utility_sum[d.spec.id] : 0.0;
    if (!relative_close(d.cumulative_utility_km, expected)) {
      problems.push_back("utility identity broken for driver " + d.spec.id);
    }
  }

  for (auto& [driver_id, trips] : by_driver) {
    std::sort(trips.begin(), trips.end(),
              [](const TripRecord* a, const TripRecord* b) {
                return a->depart_time_s < b->depart_time_s;
              });
    for (std::size_t i = 1; i < trips.size(); ++i) {
      if (trips[i]->depart_time_s < trips[i - 1]->dropoff_time_s - 1e-9) {
        problems.push_back("overlapping trips for driver " + driver_id);
        break;
      }
    }
  }

  if (result.trips.size() + result.dropped.size() + result.pending_at_end !=
      result.request_count) {
    problems.push_back("request conservation broken: served + dropped + pending "
                       "!= total");
  }
  return problems;
}

void export_trips_csv(const SimResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write trips file: " + path.string());
  }
  out << "request_id,driver_id,request_time_s,assign_time_s,depart_time_s,"
         "pickup_time_s,dropoff_time_s,deadhead_km,trip_km,emission_g,wait_s\n";
  for (const auto& t : result.trips) {
    out << t.request_id << ',' << t.driver_id << ','
        << detail::fmt_double(t.request_time_s) << ','
        << detail::fmt_double(t.assign_time_s) << ','
        << detail::fmt_double(t.depart_time_s) << ','
        << detail::fmt_double(t.pickup_time_s) << ','
        << detail::fmt_double(t.dropoff_time_s) << ','
        << detail::fmt_double(t.deadhead_km) << ','
        << detail::fmt_double(t.trip_km) << ','
        << detail::fmt_double(t.emission_g) << ','
        << detail::fmt_double(t.wait_s) << '\n';
  }
}

void export_drivers_csv(const SimResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write drivers file: " + path.string());
  }
  out << "driver_id,emission_g_per_km,class,trips_served,cumulative_utility_km,"
         "final_lat,final_lon,busy_until_s\n";
  for (const auto& d : result.final_drivers) {
    out << d.spec.id << ',' << detail::fmt_double(d.spec.emission_g_per_km) << ','
        << to_string(d.spec.cls()) << ',' << d.trips_served << ','
        << detail::fmt_double(d.cumulative_utility_km) << ','
        << detail::fmt_double(d.location.lat) << ','
        << detail::fmt_double(d.location.lon) << ','
        << detail::fmt_double(d.busy_until_s) << '\n';
  }
}

}  // namespace dispatchlab
