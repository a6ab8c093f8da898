#pragma once

#include <compare>
#include <cstddef>

namespace wxrec {

inline constexpr double kEarthRadiusKm = 6371.0;

/// A WGS84-ish coordinate on a spherical earth. Latitude lies in [-90, 90]
/// and longitude is normalized into [-180, 180).
class GeoPoint {
 public:
  GeoPoint() = default;

  /// Throws Error(bad_coords) for non-finite input, |lat| > 90 or
  /// |lon| > 360.
  GeoPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  bool operator==(const GeoPoint&) const = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

/// Longitude wrapped into [-180, 180).
double normalize_lon(double lon);

/// Great-circle distance in km. Accepts raw degrees so grid axes in
/// [0, 360) work without conversion.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  return haversine_km(a.lat(), a.lon(), b.lat(), b.lon());
}

/// Grid cell address inside a snapshot.
struct CellKey {
  std::size_t lat_idx = 0;
  std::size_t lon_idx = 0;

  auto operator<=>(const CellKey&) const = default;
};

}  // namespace wxrec
