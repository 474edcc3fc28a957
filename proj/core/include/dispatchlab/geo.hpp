#pragma once

#include <cstddef>
#include <functional>
#include <utility>

namespace dispatchlab {

inline constexpr double kEarthRadiusKm = 6371.0;

// Latitude/longitude in degrees. Validated on construction: both finite,
// lat in [-90, 90], lon in [-180, 180].
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Square-tile grid anchored at the southwest corner of the service area.
struct GridSpec {
  GeoPoint origin;
  double tile_width_km = 1.0;

  GridSpec() = default;
  GridSpec(GeoPoint origin_sw, double width_km);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct TileId {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const TileId&, const TileId&) = default;
};

struct TileIdHash {
  std::size_t operator()(const TileId& t) const {
    return std::hash<long long>()((static_cast<long long>(t.col) << 32) ^
                                  static_cast<unsigned>(t.row));
  }
};

// Great-circle distance, Earth radius fixed at 6371.0 km.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// East/north offsets of p from origin in km, local equirectangular projection
// scaled by cos(origin latitude).
std::pair<double, double> local_offsets_km(const GeoPoint& p,
                                           const GeoPoint& origin);

// Inverse of local_offsets_km: the point at the given offsets from origin.
GeoPoint offset_point(const GeoPoint& origin, double east_km, double north_km);

// Tile containing p. Floor convention on both axes; throws OutOfAreaError for
// points west or south of the grid origin.
TileId tile_of(const GeoPoint& p, const GridSpec& g);

// Pickup approach distance: great-circle length scaled by a circuity factor
// (>= 1) standing in for street-network detours.
double deadhead_km(const GeoPoint& driver_loc, const GeoPoint& pickup,
                   double circuity);

}  // namespace dispatchlab
