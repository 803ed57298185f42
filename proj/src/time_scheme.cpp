#include "replay/time_scheme.hpp"

#include <cstdlib>

#include "replay/errors.hpp"

namespace replay {

std::string to_string(TimeScale s) {
    switch (s) {
        case TimeScale::day: return "day";
        case TimeScale::weekday_weekend: return "weekday_weekend";
        case TimeScale::week: return "week";
    }
    return "?";
}

std::string to_string(TimeGranularity g) {
    return g == TimeGranularity::hour ? "hour" : "minute";
}

TimeScale time_scale_from_string(const std::string& s) {
    if (s == "day") return TimeScale::day;
    if (s == "weekday_weekend") return TimeScale::weekday_weekend;
    if (s == "week") return TimeScale::week;
    throw ConfigError("time.scale must be one of day, weekday_weekend, week; got \"" + s + "\"");
}

TimeGranularity time_granularity_from_string(const std::string& s) {
    if (s == "hour") return TimeGranularity::hour;
    if (s == "minute") return TimeGranularity::minute;
    throw ConfigError("time.granularity must be hour or minute; got \"" + s + "\"");
}

TimestampScheme TimestampScheme::make(TimeScale scale,
                                      TimeGranularity granularity) {
    TimestampScheme s;
    s.scale = scale;
    s.granularity = granularity;
    const int spd = s.slots_per_day();
    switch (scale) {
        case TimeScale::day:
            s.timestamp_count = spd;
            s.cycle_groups = {{0, spd}};
            break;
        case TimeScale::weekday_weekend:
            s.timestamp_count = 2 * spd;
            s.cycle_groups = {{0, spd}, {spd, spd}};
            break;
        case TimeScale::week:
            s.timestamp_count = 7 * spd;
            s.cycle_groups = {{0, 7 * spd}};
            break;
    }
    return s;
}

int TimestampScheme::group_index(int n) const {
    for (std::size_t g = 0; g < cycle_groups.size(); ++g) {
        const CycleGroup& cg = cycle_groups[g];
        if (n >= cg.start && n < cg.start + cg.period) {
            return static_cast<int>(g);
        }
    }
    throw DataError("timestamp index " + std::to_string(n) +
                    " outside [0, " + std::to_string(timestamp_count) + ")");
}

int TimestampScheme::slot_hour_of_day(int n) const {
    const int spd = slots_per_day();
    const int in_day = n % spd;
    return granularity == TimeGranularity::hour ? in_day : in_day / 60;
}

std::optional<bool> TimestampScheme::slot_is_weekend(int n) const {
    const int spd = slots_per_day();
    switch (scale) {
        case TimeScale::day: return std::nullopt;
        case TimeScale::weekday_weekend: return n >= spd;
        case TimeScale::week: return n / spd >= 5;
    }
    return std::nullopt;
}

int transform_timestamp(const CivilTime& local,
                        const TimestampScheme& scheme) {
    const int slot_in_day = scheme.granularity == TimeGranularity::hour
                                ? local.hour
                                : local.hour * 60 + local.minute;
    const int spd = scheme.slots_per_day();
    switch (scheme.scale) {
        case TimeScale::day:
            return slot_in_day;
        case TimeScale::weekday_weekend:
            return (local.weekday >= 5 ? spd : 0) + slot_in_day;
        case TimeScale::week:
            return local.weekday * spd + slot_in_day;
    }
    return slot_in_day;
}

int cycle_distance(int a, int b, int period) {
    int d = std::abs(a - b) % period;
    return d < period - d ? d : period - d;
}

std::optional<int> cyclical_distance(int l, int n,
                                     const TimestampScheme& scheme) {
    const int gl = scheme.group_index(l);
    const int gn = scheme.group_index(n);
    if (gl != gn) return std::nullopt;
    const CycleGroup& g = scheme.cycle_groups[static_cast<std::size_t>(gl)];
    return cycle_distance(l - g.start, n - g.start, g.period);
}

}  // namespace replay
