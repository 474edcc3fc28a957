#include "dispatchlab/geo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dispatchlab/errors.hpp"

namespace dispatchlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace

GeoPoint::GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 ||
      lon < -180.0 || lon > 180.0) {
    throw std::invalid_argument("GeoPoint out of range: lat=" +
                                std::to_string(lat_deg) +
                                " lon=" + std::to_string(lon_deg));
  }
}

GridSpec::GridSpec(GeoPoint origin_sw, double width_km)
    : origin(origin_sw), tile_width_km(width_km) {
  if (!std::isfinite(width_km) || width_km <= 0.0) {
    throw std::invalid_argument("GridSpec tile width must be positive");
  }
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = to_rad(a.lat);
  const double lat2 = to_rad(b.lat);
  const double d_lat = to_rad(b.lat - a.lat);
  const double d_lon = to_rad(b.lon - a.lon);

  const double s_lat = std::sin(d_lat / 2.0);
  const double s_lon = std::sin(d_lon / 2.0);
  double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  // clamp against rounding before the asin
  if (h > 1.0) h = 1.0;
  if (h < 0.0) h = 0.0;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

std::pair<double, double> local_offsets_km(const GeoPoint& p,
                                           const GeoPoint& origin) {
  const double km_per_deg = kEarthRadiusKm * kPi / 180.0;
  const double east = (p.lon - origin.lon) * km_per_deg * std::cos(to_rad(origin.lat));
  const double north = (p.lat - origin.lat) * km_per_deg;
  return {east, north};
}

GeoPoint offset_point(const GeoPoint& origin, double east_km, double north_km) {
  const double km_per_deg = kEarthRadiusKm * kPi / 180.0;
  const double lat = origin.lat + north_km / km_per_deg;
  const double lon = origin.lon + east_km / (km_per_deg * std::cos(to_rad(origin.lat)));
  return GeoPoint(lat, lon);
}

TileId tile_of(const GeoPoint& p, const GridSpec& g) {
  const auto [east, north] = local_offsets_km(p, g.origin);
  if (east < 0.0 || north < 0.0) {
    throw OutOfAreaError("point (" + std::to_string(p.lat) + ", " +
                         std::to_string(p.lon) +
                         ") lies southwest of the grid origin");
  }
  return TileId{static_cast<int>(std::floor(east / g.tile_width_km)),
                static_cast<int>(std::floor(north / g.tile_width_km))};
}

double deadhead_km(const GeoPoint& driver_loc, const GeoPoint& pickup,
                   double circuity) {
  if (!(circuity >= 1.0)) {
    throw std::invalid_argument("circuity factor must be >= 1.0");
  }
  return haversine_km(driver_loc, pickup) * circuity;
}

}  // namespace dispatchlab
