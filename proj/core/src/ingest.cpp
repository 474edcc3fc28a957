#include "dispatchlab/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dispatchlab/errors.hpp"
#include "dispatchlab/rng.hpp"
#include "text_util.hpp"

namespace dispatchlab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<double> parse_double(const std::string& raw) {
  const std::string s = detail::trim(raw);
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

// Epoch seconds from either a plain number or an ISO-8601 timestamp
// (YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+hh:mm|-hh:mm]).
std::optional<double> parse_timestamp(const std::string& raw) {
  const std::string s = detail::trim(raw);
  if (const auto num = parse_double(s)) return num;
  if (s.size() < 19) return std::nullopt;

  const auto digits = [&](std::size_t pos, int n) -> std::optional<int> {
    int v = 0;
    for (int i = 0; i < n; ++i) {
      const char c = s[pos + i];
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + (c - '0');
    }
    return v;
  };

  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  const auto year = digits(0, 4), month = digits(5, 2), day = digits(8, 2);
  const auto hour = digits(11, 2), min = digits(14, 2), sec = digits(17, 2);
  if (!year || !month || !day || !hour || !min || !sec) return std::nullopt;
  if (*month < 1 || *month > 12 || *day < 1 || *day > 31 || *hour > 23 ||
      *min > 59 || *sec > 60) {
    return std::nullopt;
  }

  double t = static_cast<double>(days_from_civil(*year, *month, *day)) * 86400.0 +
             *hour * 3600.0 + *min * 60.0 + *sec;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {  // fractional seconds
    ++pos;
    double frac = 0.0, scale = 0.1;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      frac += (s[pos] - '0') * scale;
      scale *= 0.1;
      ++pos;
    }
    t += frac;
  }
  if (pos < s.size()) {  // zone designator
    const char z = s[pos];
    if (z == 'Z' && pos + 1 == s.size()) {
      // UTC, nothing to do
    } else if ((z == '+' || z == '-') &&
               (s.size() == pos + 6 || s.size() == pos + 5)) {
      const auto oh = digits(pos + 1, 2);
      const auto om = s.size() == pos + 6 ? digits(pos + 4, 2) : digits(pos + 3, 2);
      if (!oh || !om || (s.size() == pos + 6 && s[pos + 3] != ':')) {
        return std::nullopt;
      }
      const double offset = *oh * 3600.0 + *om * 60.0;
      t += (z == '+') ? -offset : offset;
    } else {
      return std::nullopt;
    }
  }
  return t;
}

std::string padded_id(char prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

GeoPoint sample_mixture_point(Rng& rng, const HotspotConfig& cfg,
                              const BoundingBox& area) {
  double total = cfg.uniform_weight;
  for (const auto& h : cfg.hotspots) total += h.weight;

  const double pick = rng.uniform() * total;
  double acc = 0.0;
  const Hotspot* chosen = nullptr;
  for (const auto& h : cfg.hotspots) {
    acc += h.weight;
    if (pick < acc) {
      chosen = &h;
      break;
    }
  }
  if (chosen == nullptr) {  // uniform background component
    const double lat = rng.uniform(area.sw.lat, area.ne.lat);
    const double lon = rng.uniform(area.sw.lon, area.ne.lon);
    return GeoPoint(lat, lon);
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double east = rng.normal(0.0, chosen->sigma_km);
    const double north = rng.normal(0.0, chosen->sigma_km);
    const GeoPoint p = offset_point(chosen->center, east, north);
    if (area.contains(p)) return p;
  }
  const GeoPoint p = offset_point(chosen->center, 0.0, 0.0);
  return GeoPoint(std::clamp(p.lat, area.sw.lat, area.ne.lat),
                  std::clamp(p.lon, area.sw.lon, area.ne.lon));
}

double draw_emission_rate(Rng& rng, const std::vector<FleetClassSpec>& classes,
                          double total_weight) {
  const double pick = rng.uniform() * total_weight;
  const double spread = rng.uniform(-1.0, 1.0);
  double acc = 0.0;
  for (const auto& c : classes) {
    acc += c.weight;
    if (pick < acc) {
      return std::max(0.0, c.g_per_km + spread * c.half_width_g_per_km);
    }
  }
  return classes.back().g_per_km;
}

}  // namespace

VehicleClass vehicle_class(double emission_g_per_km) {
  if (emission_g_per_km < kLevMaxGPerKm) return VehicleClass::LEV;
  if (emission_g_per_km > kHevMinGPerKm) return VehicleClass::HEV;
  return VehicleClass::MID;
}

std::string_view to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::LEV: return "LEV";
    case VehicleClass::MID: return "MID";
    case VehicleClass::HEV: return "HEV";
  }
  return "?";
}

TripLog load_trips(const std::filesystem::path& path, DistanceSource source,
                   const TripLogColumns& columns) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open trip log: " + path.string());
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("trip log missing column '" + columns.start_ts +
                      "' (empty file)");
  }
  const auto header = detail::split_csv_line(line);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    index.emplace(detail::trim(header[i]), i);
  }

  const auto required = [&](const std::string& name) -> std::size_t {
    const auto it = index.find(name);
    if (it == index.end()) {
      throw SchemaError("trip log missing column '" + name + "'");
    }
    return it->second;
  };
  const std::size_t c_ts = required(columns.start_ts);
  const std::size_t c_slat = required(columns.start_lat);
  const std::size_t c_slon = required(columns.start_lon);
  const std::size_t c_elat = required(columns.end_lat);
  const std::size_t c_elon = required(columns.end_lon);
  std::size_t c_trip = header.size();
  if (source == DistanceSource::recorded) {
    c_trip = required(columns.trip_km);
  } else if (const auto it = index.find(columns.trip_km); it != index.end()) {
    c_trip = it->second;
  }
  const auto drv_it = index.find(columns.driver_id);
  const bool has_driver = drv_it != index.end();

  struct RawRow {
    double t;
    GeoPoint pickup;
    GeoPoint dropoff;
    double trip_km;
    std::string driver;
    std::size_t order;
  };
  std::vector<RawRow> rows;
  TripLog out;
  out.has_driver_ids = has_driver;

  std::size_t order = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      ++out.dropped_rows;
      continue;
    }
    const auto ts = parse_timestamp(fields[c_ts]);
    const auto slat = parse_double(fields[c_slat]);
    const auto slon = parse_double(fields[c_slon]);
    const auto elat = parse_double(fields[c_elat]);
    const auto elon = parse_double(fields[c_elon]);
    if (!ts || !slat || !slon || !elat || !elon) {
      ++out.dropped_rows;
      continue;
    }
    GeoPoint pickup, dropoff;
    try {
      pickup = GeoPoint(*slat, *slon);
      dropoff = GeoPoint(*elat, *elon);
    } catch (const std::invalid_argument&) {
      ++out.dropped_rows;
      continue;
    }
    double trip_km = 0.0;
    if (source == DistanceSource::recorded) {
      const auto rec = parse_double(fields[c_trip]);
      if (!rec || *rec <= 0.0) {
        ++out.dropped_rows;
        continue;
      }
      trip_km = *rec;
    } else {
      trip_km = haversine_km(pickup, dropoff);
      if (trip_km <= 0.0) {
        ++out.dropped_rows;
        continue;
      }
    }
    rows.push_back(RawRow{*ts, pickup, dropoff, trip_km,
                          has_driver ? detail::trim(fields[drv_it->second])
                                     : std::string(),
                          order++});
  }

  std::sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
    return a.t != b.t ? a.t < b.t : a.order < b.order;
  });

  const double t0 = rows.empty() ? 0.0 : rows.front().t;
  out.requests.reserve(rows.size());
  out.driver_ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.requests.push_back(RideRequest{padded_id('r', i, 6), rows[i].pickup,
                                       rows[i].dropoff, rows[i].t - t0,
                                       rows[i].trip_km});
    out.driver_ids.push_back(rows[i].driver);
  }
  return out;
}

FleetProfile FleetProfile::default_mixed() {
  // Desk-scale fleets (tens of drivers) cannot carry a meaningful 310 g/km
  // share without starving it outright, so the default draws none; HEV
  // participation comes from profile configs.
  return FleetProfile{{
      {"EV", kEvGPerKm, 0.05},
      {"LEV", 120.0, 0.10},
      {"MID", 200.0, 0.85},
      {"HEV", 310.0, 0.00},
  }};
}

std::vector<DriverSpec> build_fleet(int n_drivers, const FleetProfile& profile,
                                    const BoundingBox& spawn_region,
                                    std::uint64_t seed) {
  if (n_drivers < 1) {
    throw ConfigError("fleet size must be at least 1");
  }
  double total_weight = 0.0;
  for (const auto& c : profile.classes) {
    if (c.weight < 0.0 || c.g_per_km < 0.0) {
      throw ConfigError("fleet profile weights and rates must be non-negative");
    }
    total_weight += c.weight;
  }
  if (profile.classes.empty() || total_weight <= 0.0) {
    throw ConfigError("fleet profile is empty");
  }

  Rng rng(seed);
  std::vector<DriverSpec> fleet;
  fleet.reserve(static_cast<std::size_t>(n_drivers));
  for (int i = 0; i < n_drivers; ++i) {
    DriverSpec d;
    d.id = padded_id('d', static_cast<std::size_t>(i), 4);
    d.emission_g_per_km = draw_emission_rate(rng, profile.classes, total_weight);
    const double lat = rng.uniform(spawn_region.sw.lat, spawn_region.ne.lat);
    const double lon = rng.uniform(spawn_region.sw.lon, spawn_region.ne.lon);
    d.initial_location = GeoPoint(lat, lon);
    fleet.push_back(std::move(d));
  }
  return fleet;
}

std::vector<DriverSpec> electrify(std::vector<DriverSpec> fleet,
                                  double target_lev_pct, std::uint64_t seed) {
  if (fleet.empty()) {
    throw ConfigError("cannot electrify an empty fleet");
  }
  const std::size_t n = fleet.size();
  std::vector<std::size_t> non_lev;
  for (std::size_t i = 0; i < n; ++i) {
    if (fleet[i].cls() != VehicleClass::LEV) non_lev.push_back(i);
  }
  const std::size_t current = n - non_lev.size();
  const double current_pct = 100.0 * static_cast<double>(current) / static_cast<double>(n);
  if (target_lev_pct < current_pct - 1e-9) {
    throw ConfigError("electrify target " + std::to_string(target_lev_pct) +
                      "% is below the current LEV share of " +
                      std::to_string(current_pct) + "%");
  }
  const auto want = static_cast<std::size_t>(
      std::llround(target_lev_pct / 100.0 * static_cast<double>(n)));
  if (want <= current) return fleet;
  std::size_t need = std::min(want - current, non_lev.size());

  // Partial Fisher-Yates over the non-LEV index list.
  Rng rng(seed);
  for (std::size_t i = 0; i < need; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(
                                  static_cast<std::uint64_t>(non_lev.size() - i)));
    std::swap(non_lev[i], non_lev[j]);
    fleet[non_lev[i]].emission_g_per_km = kEvGPerKm;
  }
  return fleet;
}

std::vector<DriverSpec> fleet_from_trip_log(const TripLog& log,
                                            const FleetProfile& profile,
                                            int n_fallback_drivers,
                                            std::uint64_t seed) {
  bool any_id = false;
  for (const auto& id : log.driver_ids) {
    if (!id.empty()) {
      any_id = true;
      break;
    }
  }
  if (!log.has_driver_ids || !any_id) {
    return build_fleet(n_fallback_drivers, profile,
                       bounding_box_of(log.requests), seed);
  }

  double total_weight = 0.0;
  for (const auto& c : profile.classes) total_weight += c.weight;
  if (profile.classes.empty() || total_weight <= 0.0) {
    throw ConfigError("fleet profile is empty");
  }

  Rng rng(seed);
  std::vector<DriverSpec> fleet;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t i = 0; i < log.requests.size(); ++i) {
    const std::string& id = log.driver_ids[i];
    if (id.empty() || seen.count(id)) continue;
    seen.emplace(id, true);
    DriverSpec d;
    d.id = id;
    d.initial_location = log.requests[i].pickup;  // first observed trip
    d.emission_g_per_km = draw_emission_rate(rng, profile.classes, total_weight);
    fleet.push_back(std::move(d));
  }
  return fleet;
}

BoundingBox default_service_area() {
  const GeoPoint sw(30.10, -97.85);
  return BoundingBox{sw, offset_point(sw, 10.0, 10.0)};
}

// A compact downtown cluster inside a larger service box: most demand is
// short-haul within the cluster, while the uniform tail keeps stranding
// drivers on the outskirts between trips.
HotspotConfig HotspotConfig::default_city(const BoundingBox& area) {
  HotspotConfig cfg;
  cfg.hotspots = {
      {offset_point(area.sw, 4.0, 4.0), 0.40, 0.7},
      {offset_point(area.sw, 5.5, 5.0), 0.30, 0.9},
      {offset_point(area.sw, 4.5, 6.0), 0.20, 1.0},
  };
  cfg.uniform_weight = 0.10;
  return cfg;
}

Scenario synth_scenario(const SynthParams& params) {
  if (params.n_requests < 0 || params.n_drivers < 1 || params.duration_s <= 0.0) {
    throw ConfigError("synthetic scenario needs n_requests >= 0, "
                      "n_drivers >= 1 and a positive duration");
  }
  const BoundingBox area =
      (params.area.sw == params.area.ne) ? default_service_area() : params.area;
  const HotspotConfig hotspots =
      (params.hotspots.hotspots.empty() && params.hotspots.uniform_weight <= 0.0)
          ? HotspotConfig::default_city(area)
          : params.hotspots;
  const FleetProfile profile =
      params.profile.classes.empty() ? FleetProfile::default_mixed() : params.profile;

  Rng rng(params.seed);
  std::vector<double> times(static_cast<std::size_t>(params.n_requests));
  for (auto& t : times) t = rng.uniform(0.0, params.duration_s);
  std::sort(times.begin(), times.end());

  Scenario s;
  s.seed = params.seed;
  s.grid = grid_for(area, params.tile_width_km);
  s.requests.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    RideRequest r;
    r.id = padded_id('r', i, 6);
    r.request_time_s = times[i];
    r.pickup = sample_mixture_point(rng, hotspots, area);
    r.dropoff = sample_mixture_point(rng, hotspots, area);
    r.trip_km = haversine_km(r.pickup, r.dropoff);
    s.requests.push_back(std::move(r));
  }
  s.fleet = build_fleet(params.n_drivers, profile, area,
                        params.seed ^ 0x9e3779b97f4a7c15ULL);
  return s;
}

Scenario synth_scenario(int n_requests, int n_drivers, double duration_s,
                        const HotspotConfig& hotspots, std::uint64_t seed) {
  SynthParams p;
  p.n_requests = n_requests;
  p.n_drivers = n_drivers;
  p.duration_s = duration_s;
  p.hotspots = hotspots;
  p.seed = seed;
  return synth_scenario(p);
}

BoundingBox bounding_box_of(const std::vector<RideRequest>& requests) {
  if (requests.empty()) {
    throw ConfigError("cannot derive a bounding box from an empty request list");
  }
  double lat_lo = 90.0, lat_hi = -90.0, lon_lo = 180.0, lon_hi = -180.0;
  for (const auto& r : requests) {
    for (const GeoPoint* p : {&r.pickup, &r.dropoff}) {
      lat_lo = std::min(lat_lo, p->lat);
      lat_hi = std::max(lat_hi, p->lat);
      lon_lo = std::min(lon_lo, p->lon);
      lon_hi = std::max(lon_hi, p->lon);
    }
  }
  return BoundingBox{GeoPoint(lat_lo, lon_lo), GeoPoint(lat_hi, lon_hi)};
}

GridSpec grid_for(const BoundingBox& box, double tile_width_km) {
  return GridSpec(box.sw, tile_width_km);
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json j;
  j["format"] = "dispatch-lab-scenario-v1";
  j["seed"] = s.seed;
  j["grid"] = {{"origin_lat", s.grid.origin.lat},
               {"origin_lon", s.grid.origin.lon},
               {"tile_width_km", s.grid.tile_width_km}};
  ordered_json fleet = ordered_json::array();
  for (const auto& d : s.fleet) {
    fleet.push_back({{"id", d.id},
                     {"lat", d.initial_location.lat},
                     {"lon", d.initial_location.lon},
                     {"g_per_km", d.emission_g_per_km}});
  }
  j["fleet"] = std::move(fleet);
  ordered_json requests = ordered_json::array();
  for (const auto& r : s.requests) {
    requests.push_back({{"id", r.id},
                        {"t", r.request_time_s},
                        {"p_lat", r.pickup.lat},
                        {"p_lon", r.pickup.lon},
                        {"q_lat", r.dropoff.lat},
                        {"q_lon", r.dropoff.lon},
                        {"trip_km", r.trip_km}});
  }
  j["requests"] = std::move(requests);
  return j.dump(2) + "\n";
}

Scenario parse_scenario(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario parse failure: ") + e.what());
  }
  if (j.value("format", "") != "dispatch-lab-scenario-v1") {
    throw SchemaError("unrecognized scenario format tag");
  }
  Scenario s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& g = j.at("grid");
    s.grid = GridSpec(GeoPoint(g.at("origin_lat").get<double>(),
                               g.at("origin_lon").get<double>()),
                      g.at("tile_width_km").get<double>());
    for (const auto& d : j.at("fleet")) {
      s.fleet.push_back(DriverSpec{
          d.at("id").get<std::string>(),
          GeoPoint(d.at("lat").get<double>(), d.at("lon").get<double>()),
          d.at("g_per_km").get<double>()});
    }
    for (const auto& r : j.at("requests")) {
      s.requests.push_back(RideRequest{
          r.at("id").get<std::string>(),
          GeoPoint(r.at("p_lat").get<double>(), r.at("p_lon").get<double>()),
          GeoPoint(r.at("q_lat").get<double>(), r.at("q_lon").get<double>()),
          r.at("t").get<double>(), r.at("trip_km").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("scenario parse failure: ") + e.what());
  }
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write scenario: " + path.string());
  }
  out << serialize_scenario(s);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read scenario: " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace dispatchlab
