#pragma once

namespace replay {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance in kilometers between two (lat, lon) points in
/// degrees. Throws DataError on out-of-range coordinates.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

}  // namespace replay
