#ifndef MECSIM_GEO_HPP_
#define MECSIM_GEO_HPP_

#include <cmath>

namespace mecsim {

// Geographic position in degrees. lat in [-90, 90], lng in [-180, 180].
struct GeoPoint {
  double lat = 0.0;
  double lng = 0.0;
};

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// Equirectangular projection distance in meters. Adequate for study areas of
// a few kilometers, where the projection error is far below station spacing.
inline double distance_m(const GeoPoint& a, const GeoPoint& b) {
  const double mean_lat = 0.5 * (a.lat + b.lat) * kDegToRad;
  const double x = (b.lng - a.lng) * kDegToRad * std::cos(mean_lat);
  const double y = (b.lat - a.lat) * kDegToRad;
  return kEarthRadiusM * std::sqrt(x * x + y * y);
}

inline double distance_km(const GeoPoint& a, const GeoPoint& b) {
  return distance_m(a, b) / 1000.0;
}

// Offset a point by east/north meters (small-displacement approximation,
// consistent with distance_m).
inline GeoPoint offset_m(const GeoPoint& origin, double east_m, double north_m) {
  GeoPoint out;
  out.lat = origin.lat + north_m / (kEarthRadiusM * kDegToRad);
  out.lng = origin.lng +
            east_m / (kEarthRadiusM * kDegToRad * std::cos(origin.lat * kDegToRad));
  return out;
}

}  // namespace mecsim

#endif  // MECSIM_GEO_HPP_
