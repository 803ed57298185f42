// Check-in ingestion, chronological splitting, corpus statistics,
// returning-probability histograms, and the synthetic corpus generator.
//
// File format, one check-in per row:
//   user_id,poi_id,utc_time_iso8601,lat,lon[,tz_offset_minutes]
// When the offset column is missing, local time falls back to a
// longitude band: offset = round(lon / 15) * 60 minutes.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "replay/chrono.hpp"
#include "replay/rng.hpp"

namespace replay {

struct CheckIn {
    std::int64_t user_id = 0;  // raw id from the file
    std::int64_t poi_id = 0;   // raw id from the file
    std::int64_t utc_seconds = 0;
    double lat = 0.0;
    double lon = 0.0;
    std::optional<int> tz_offset_minutes;  // as given in the file
    int effective_offset_minutes = 0;      // tz column or longitude band

    CivilTime local_time() const {
        return civil_from_seconds(utc_seconds + 60ll * effective_offset_minutes);
    }
};

struct IngestOptions {
    char delimiter = ',';
};

struct IngestReport {
    std::size_t rows_parsed = 0;
    std::size_t rejected_coordinates = 0;
    std::size_t duplicates_dropped = 0;
    std::vector<std::string> warnings;
};

/// Parses a check-in file. Malformed rows raise DataError naming the line;
/// out-of-range coordinates reject the row and count it in the report;
/// duplicate (user, utc_time) rows keep the first occurrence. An empty
/// file yields an empty list plus a warning.
std::vector<CheckIn> ingest(const std::string& path,
                            const IngestOptions& options,
                            IngestReport* report = nullptr);

/// Writes check-ins in the canonical row format (offset column always
/// present). ingest(write(x)) == x on valid rows.
void write_checkins(const std::string& path,
                    const std::vector<CheckIn>& checkins);

/// A check-in after vocabulary mapping: dense user/poi indices.
struct Event {
    int user = 0;
    int poi = 0;
    std::int64_t utc_seconds = 0;
    double lat = 0.0;
    double lon = 0.0;
    int offset_minutes = 0;

    CivilTime local_time() const {
        return civil_from_seconds(utc_seconds + 60ll * offset_minutes);
    }
    double utc_days() const {
        return static_cast<double>(utc_seconds) / 86400.0;
    }
};

struct SplitCorpus {
    std::vector<std::int64_t> user_ids;  // dense user index -> raw id
    std::vector<std::int64_t> poi_ids;   // dense poi index -> raw id
    std::vector<std::vector<Event>> train;  // per dense user, time-sorted
    std::vector<std::vector<Event>> test;
    std::vector<std::int64_t> dropped_users;  // raw ids below min_checkins

    int user_count() const { return static_cast<int>(user_ids.size()); }
    int poi_count() const { return static_cast<int>(poi_ids.size()); }
};

/// Chronological per-user split: first ceil(train_fraction * N) check-ins
/// train, rest test. Users with fewer than min_checkins are dropped and
/// reported. Duplicate (user, utc) rows keep the first. Vocabularies
/// cover every retained check-in.
SplitCorpus split_chronological(const std::vector<CheckIn>& checkins,
                                double train_fraction = 0.8,
                                std::size_t min_checkins = 5);

struct SyntheticSpec {
    int user_count = 50;
    int poi_count = 100;
    int days = 90;
    double rate_per_day = 3.0;
    double weekend_damping = 1.0;  // multiplies rho on Sat/Sun
    int home_pois = 8;             // regular POIs per user
    int record_jitter_hours = 0;   // recorded hour = intent hour +/- jitter
    int active_window_hours = 24;  // daily activity span per user (24 = all day)
    int chronotype_drift_hours = 0;  // window start shift over the whole corpus
    std::uint64_t seed = 1;
    std::vector<double> rho;  // 24 entries, revisit probability per hour

    SyntheticSpec() : rho(24, 0.55) {}
    void validate() const;
};

/// Generates a corpus where each user binds one home POI to every hour of
/// the day; an event at hour h revisits the bound POI with probability
/// rho[h] (damped on weekends) and otherwise picks a uniform random POI.
/// Deterministic under the spec seed. Coordinates are fixed per POI inside
/// a city-scale box.
std::vector<CheckIn> generate_synthetic(const SyntheticSpec& spec);

struct ReturningHistogram {
    double bin_width_hours = 1.0;
    std::vector<std::uint64_t> counts;            // all pairs
    std::vector<std::uint64_t> daytime_counts;    // earlier check-in 6-18h
    std::vector<std::uint64_t> nighttime_counts;  // earlier check-in 18-6h
    std::size_t total_checkins = 0;

    double probability(std::size_t bin) const {
        return static_cast<double>(counts[bin]) /
               static_cast<double>(total_checkins);
    }
};

/// Lag histogram over all ordered same-user same-POI pairs with lag up to
/// max_lag_hours; each bin normalized by the total check-in count. The
/// day/night split keys on the earlier check-in's local hour.
ReturningHistogram returning_probability(const std::vector<CheckIn>& checkins,
                                         double bin_width_hours = 1.0,
                                         double max_lag_hours = 168.0,
                                         bool with_day_night_split = true);

struct CorpusStats {
    std::size_t users = 0;
    std::size_t pois = 0;
    std::size_t checkins = 0;
    double span_days = 0.0;
    std::optional<double> median_gap_hours;  // absent without any gap
};

CorpusStats corpus_stats(const std::vector<CheckIn>& checkins);

}  // namespace replay
