// Calendar arithmetic on epoch seconds, self-contained so that results
// are identical on every platform. Proleptic Gregorian calendar, no leap
// seconds, weekday convention Monday = 0.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace replay {

struct CivilTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
    int weekday = 3;  // Monday = 0 .. Sunday = 6 (1970-01-01 was a Thursday)
};

/// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int year, int month, int day);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

/// Monday = 0 .. Sunday = 6.
int weekday_from_days(std::int64_t days);

/// Decomposes epoch seconds into civil time (UTC if seconds are UTC;
/// pass local seconds for local civil time).
CivilTime civil_from_seconds(std::int64_t seconds);

/// Epoch seconds for a civil time.
std::int64_t seconds_from_civil(const CivilTime& t);

/// Parses "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z' and optional
/// space instead of 'T'. Returns nullopt on malformed input.
std::optional<std::int64_t> parse_iso8601_utc(const std::string& s);

/// Formats epoch seconds as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(std::int64_t seconds);

}  // namespace replay
