#include "wxrec/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wxrec/error.hpp"

namespace wxrec {

double normalize_lon(double lon) {
  double r = std::fmod(lon + 180.0, 360.0);
  if (r < 0) r += 360.0;
  return r - 180.0;
}

GeoPoint::GeoPoint(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 ||
      lon < -360.0 || lon > 360.0) {
    throw Error(Errc::bad_coords, "coordinates out of range");
  }
  lat_ = lat;
  lon_ = normalize_lon(lon);
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double s1 = std::sin(dlat / 2);
  const double s2 = std::sin(dlon / 2);
  double h = s1 * s1 + std::cos(lat1 * rad) * std::cos(lat2 * rad) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

}  // namespace wxrec
