#include "replay/chrono.hpp"

#include <cstdio>

namespace replay {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = floor_div(y, 400);
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
        static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = floor_div(z, 146097);
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe =
        (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    year = static_cast<int>(y + (month <= 2));
}

int weekday_from_days(std::int64_t days) {
    // 1970-01-01 (day 0) is Thursday; Monday = 0 makes Thursday 3.
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

CivilTime civil_from_seconds(std::int64_t seconds) {
    const std::int64_t days = floor_div(seconds, 86400);
    const std::int64_t sod = seconds - days * 86400;
    CivilTime t;
    civil_from_days(days, t.year, t.month, t.day);
    t.hour = static_cast<int>(sod / 3600);
    t.minute = static_cast<int>((sod % 3600) / 60);
    t.second = static_cast<int>(sod % 60);
    t.weekday = weekday_from_days(days);
    return t;
}

std::int64_t seconds_from_civil(const CivilTime& t) {
    return days_from_civil(t.year, t.month, t.day) * 86400 +
           t.hour * 3600 + t.minute * 60 + t.second;
}

std::optional<std::int64_t> parse_iso8601_utc(const std::string& s) {
    int y, mo, d, h, mi, se;
    char sep;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d%n", &y, &mo, &d, &sep, &h,
                    &mi, &se, &consumed) != 7) {
        return std::nullopt;
    }
    if (sep != 'T' && sep != ' ') return std::nullopt;
    std::string rest = s.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty() && rest != "Z") return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 60) {
        return std::nullopt;
    }
    CivilTime t;
    t.year = y;
    t.month = mo;
    t.day = d;
    t.hour = h;
    t.minute = mi;
    t.second = se;
    return seconds_from_civil(t);
}

std::string format_iso8601_utc(std::int64_t seconds) {
    const CivilTime t = civil_from_seconds(seconds);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", t.year,
                  t.month, t.day, t.hour, t.minute, t.second);
    return buf;
}

}  // namespace replay
