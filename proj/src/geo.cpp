#include "replay/geo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "replay/errors.hpp"

namespace replay {

namespace {

constexpr double kPi = 3.14159265358979323846;

double to_rad(double deg) { return deg * kPi / 180.0; }

void check_coord(double lat, double lon) {
    if (!(lat >= -90.0 && lat <= 90.0)) {
        throw DataError("latitude out of range [-90, 90]: " +
                        std::to_string(lat));
    }
    if (!(lon >= -180.0 && lon <= 180.0)) {
        throw DataError("longitude out of range [-180, 180]: " +
                        std::to_string(lon));
    }
}

}  // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    check_coord(lat1, lon1);
    check_coord(lat2, lon2);
    const double phi1 = to_rad(lat1);
    const double phi2 = to_rad(lat2);
    const double dphi = to_rad(lat2 - lat1);
    const double dlam = to_rad(lon2 - lon1);
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    a = std::clamp(a, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

}  // namespace replay
