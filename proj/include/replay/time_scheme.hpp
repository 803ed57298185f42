// Cyclical timestamp spaces. A scheme discretizes local time into slots
// and partitions the slots into cyclic groups; distances are shortest
// arcs within a group and "disconnected" across groups.
//
// Slot counts per (scale, granularity):
//   day/hour 24, day/minute 1440, weekday_weekend/hour 48,
//   weekday_weekend/minute 2880, week/hour 168, week/minute 10080.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "replay/chrono.hpp"

namespace replay {

enum class TimeScale { day, weekday_weekend, week };
enum class TimeGranularity { hour, minute };

std::string to_string(TimeScale s);
std::string to_string(TimeGranularity g);
TimeScale time_scale_from_string(const std::string& s);
TimeGranularity time_granularity_from_string(const std::string& s);

struct CycleGroup {
    int start = 0;   // first slot of the group
    int period = 0;  // number of slots, also the cycle period
};

struct TimestampScheme {
    TimeScale scale = TimeScale::week;
    TimeGranularity granularity = TimeGranularity::hour;
    int timestamp_count = 168;
    std::vector<CycleGroup> cycle_groups;

    static TimestampScheme make(TimeScale scale, TimeGranularity granularity);

    int slots_per_day() const {
        return granularity == TimeGranularity::hour ? 24 : 1440;
    }
    /// Index of the cycle group containing slot n.
    int group_index(int n) const;
    const CycleGroup& group_of(int n) const {
        return cycle_groups[static_cast<std::size_t>(group_index(n))];
    }

    /// Hour of day a slot falls in (for period breakdowns).
    int slot_hour_of_day(int n) const;
    /// Whether a slot belongs to Saturday or Sunday. nullopt for the day
    /// scale, which carries no weekday information.
    std::optional<bool> slot_is_weekend(int n) const;
};

/// Maps local civil time onto a slot index in [0, timestamp_count).
/// Week scale: n = slots_per_day * weekday + slot_in_day with Monday = 0.
/// Day scale drops the weekday. Weekday_weekend maps Mon-Fri into group 0
/// and Sat-Sun into group 1, daily period inside each group.
int transform_timestamp(const CivilTime& local, const TimestampScheme& scheme);

/// Shortest arc between slots within one cycle group; nullopt when the
/// slots live in different groups (no smoothing across groups).
std::optional<int> cyclical_distance(int l, int n,
                                     const TimestampScheme& scheme);

/// Shortest arc on a plain cycle of the given period.
int cycle_distance(int a, int b, int period);

}  // namespace replay
