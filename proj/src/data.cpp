#include "replay/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "replay/errors.hpp"

namespace replay {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_row(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) fields.push_back(trim(field));
    if (!line.empty() && line.back() == delim) fields.push_back("");
    return fields;
}

int longitude_band_offset_minutes(double lon) {
    return static_cast<int>(std::lround(lon / 15.0)) * 60;
}

}  // namespace

std::vector<CheckIn> ingest(const std::string& path,
                            const IngestOptions& options,
                            IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open check-in file: " + path);

    IngestReport local_report;
    IngestReport& rep = report ? *report : local_report;
    std::vector<CheckIn> out;
    std::unordered_map<std::int64_t, std::unordered_set<std::int64_t>> seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty() || row[0] == '#') continue;
        const auto fields = split_row(row, options.delimiter);
        if (fields.size() != 5 && fields.size() != 6) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected 5 or 6 fields, got " +
                            std::to_string(fields.size()));
        }
        CheckIn c;
        try {
            c.user_id = std::stoll(fields[0]);
            c.poi_id = std::stoll(fields[1]);
            c.lat = std::stod(fields[3]);
            c.lon = std::stod(fields[4]);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": malformed numeric field");
        }
        const auto utc = parse_iso8601_utc(fields[2]);
        if (!utc) {
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": malformed timestamp \"" + fields[2] + "\"");
        }
        c.utc_seconds = *utc;
        if (fields.size() == 6 && !fields[5].empty()) {
            try {
                c.tz_offset_minutes = std::stoi(fields[5]);
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": malformed tz offset \"" + fields[5] + "\"");
            }
        }
        ++rep.rows_parsed;
        if (c.lat < -90.0 || c.lat > 90.0 || c.lon < -180.0 || c.lon > 180.0) {
            ++rep.rejected_coordinates;
            continue;
        }
        if (!seen[c.user_id].insert(c.utc_seconds).second) {
            ++rep.duplicates_dropped;
            continue;
        }
        c.effective_offset_minutes = c.tz_offset_minutes
                                         ? *c.tz_offset_minutes
                                         : longitude_band_offset_minutes(c.lon);
        out.push_back(c);
    }
    if (out.empty()) {
        rep.warnings.push_back("no check-ins found in " + path);
    }
    return out;
}

void write_checkins(const std::string& path,
                    const std::vector<CheckIn>& checkins) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write check-in file: " + path);
    char buf[256];
    for (const CheckIn& c : checkins) {
        std::snprintf(buf, sizeof(buf), "%lld,%lld,%s,%.17g,%.17g,%d\n",
                      static_cast<long long>(c.user_id),
                      static_cast<long long>(c.poi_id),
                      format_iso8601_utc(c.utc_seconds).c_str(), c.lat, c.lon,
                      c.effective_offset_minutes);
        out << buf;
    }
}

SplitCorpus split_chronological(const std::vector<CheckIn>& checkins,
                                double train_fraction,
                                std::size_t min_checkins) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0, 1)");
    }
    // Group per user, preserving input order for equal timestamps.
    std::map<std::int64_t, std::vector<const CheckIn*>> by_user;
    for (const CheckIn& c : checkins) by_user[c.user_id].push_back(&c);

    SplitCorpus corpus;
    std::map<std::int64_t, int> poi_index;
    for (auto& [user_id, rows] : by_user) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const CheckIn* a, const CheckIn* b) {
                             return a->utc_seconds < b->utc_seconds;
                         });
        if (rows.size() < min_checkins) {
            corpus.dropped_users.push_back(user_id);
            continue;
        }
        const int user = static_cast<int>(corpus.user_ids.size());
        corpus.user_ids.push_back(user_id);
        corpus.train.emplace_back();
        corpus.test.emplace_back();
        const std::size_t n_train = static_cast<std::size_t>(
            std::ceil(train_fraction * static_cast<double>(rows.size())));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const CheckIn& c = *rows[i];
            auto [it, inserted] =
                poi_index.emplace(c.poi_id, static_cast<int>(corpus.poi_ids.size()));
            if (inserted) corpus.poi_ids.push_back(c.poi_id);
            Event e;
            e.user = user;
            e.poi = it->second;
            e.utc_seconds = c.utc_seconds;
            e.lat = c.lat;
            e.lon = c.lon;
            e.offset_minutes = c.effective_offset_minutes;
            (i < n_train ? corpus.train.back() : corpus.test.back())
                .push_back(e);
        }
    }
    return corpus;
}

void SyntheticSpec::validate() const {
    if (user_count < 0 || poi_count <= 0 || days <= 0) {
        throw ConfigError("synthetic spec: counts must be positive");
    }
    if (!(rate_per_day > 0.0) || rate_per_day > 24.0) {
        throw ConfigError(
            "synthetic spec: rate_per_day must be in (0, 24] (at most one "
            "check-in per hour slot)");
    }
    if (rho.size() != 24) {
        throw ConfigError("synthetic spec: rho must have 24 entries");
    }
    for (double r : rho) {
        if (r < 0.0 || r > 1.0) {
            throw ConfigError("synthetic spec: rho entries must be in [0, 1]");
        }
    }
    if (weekend_damping < 0.0 || weekend_damping > 1.0) {
        throw ConfigError("synthetic spec: weekend_damping must be in [0, 1]");
    }
    if (home_pois < 1 || home_pois > 24) {
        throw ConfigError("synthetic spec: home_pois must be in [1, 24]");
    }
    if (record_jitter_hours < 0 || record_jitter_hours > 12) {
        throw ConfigError(
            "synthetic spec: record_jitter_hours must be in [0, 12]");
    }
    if (active_window_hours < 1 || active_window_hours > 24) {
        throw ConfigError(
            "synthetic spec: active_window_hours must be in [1, 24]");
    }
    if (chronotype_drift_hours < 0 || chronotype_drift_hours > 24) {
        throw ConfigError(
            "synthetic spec: chronotype_drift_hours must be in [0, 24]");
    }
    if (rate_per_day > active_window_hours) {
        throw ConfigError(
            "synthetic spec: rate_per_day cannot exceed active_window_hours");
    }
}

std::vector<CheckIn> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();

    // Venues are grouped into a few time-typed pools (morning venues,
    // midday venues, ...) by contiguous id range. Each pool is a tight
    // spatial cluster (venues meters apart, clusters kilometers apart),
    // so the sharp spatial decay of the flashback weights keeps history
    // within the active cluster relevant. Offsets are zero so local time
    // equals UTC.
    const int coord_pools = std::min(4, spec.home_pois);
    Rng poi_rng(derive_seed(spec.seed, "synthetic.pois"));
    std::vector<double> pool_lat(static_cast<std::size_t>(coord_pools));
    std::vector<double> pool_lon(static_cast<std::size_t>(coord_pools));
    for (int c = 0; c < coord_pools; ++c) {
        pool_lat[static_cast<std::size_t>(c)] = poi_rng.uniform(-0.03, 0.03);
        pool_lon[static_cast<std::size_t>(c)] = poi_rng.uniform(-0.03, 0.03);
    }
    std::vector<double> poi_lat(static_cast<std::size_t>(spec.poi_count));
    std::vector<double> poi_lon(static_cast<std::size_t>(spec.poi_count));
    for (int p = 0; p < spec.poi_count; ++p) {
        const int c = std::min(p * coord_pools / spec.poi_count,
                               coord_pools - 1);
        poi_lat[static_cast<std::size_t>(p)] =
            pool_lat[static_cast<std::size_t>(c)] +
            poi_rng.uniform(-0.00005, 0.00005);
        poi_lon[static_cast<std::size_t>(p)] =
            pool_lon[static_cast<std::size_t>(c)] +
            poi_rng.uniform(-0.00005, 0.00005);
    }

    // Corpus starts on a Monday (2024-01-01).
    const std::int64_t start = days_from_civil(2024, 1, 1) * 86400;

    // The day is split into home_pois binding segments, each bound to one
    // home POI. Venues are time-typed: the POI id range is divided into a
    // few coarse pools (morning venues, midday venues, ...), and a
    // segment's home POI is drawn from the pool covering its hours. A
    // user therefore holds several distinct home POIs inside each pool,
    // so knowing the user and the hour's pool still leaves the within-day
    // schedule to be read from the user's own history.
    const int segments = spec.home_pois;
    const int pools = coord_pools;

    std::vector<CheckIn> out;
    const double hourly_rate = spec.rate_per_day / 24.0;
    for (int u = 0; u < spec.user_count; ++u) {
        Rng rng(derive_seed(spec.seed, "synthetic.user",
                            static_cast<std::uint64_t>(u)));
        std::vector<int> home(static_cast<std::size_t>(segments));
        for (int k = 0; k < segments; ++k) {
            const int pool = k * pools / segments;
            const int lo = pool * spec.poi_count / pools;
            int hi = (pool + 1) * spec.poi_count / pools;
            if (hi <= lo) hi = lo + 1;
            if (hi > spec.poi_count) hi = spec.poi_count;
            // Distinct from this user's earlier picks in the same pool,
            // when the pool is large enough to allow it.
            int pick;
            int attempts = 0;
            do {
                pick = lo + static_cast<int>(rng.uniform_int(
                                static_cast<std::uint64_t>(hi - lo)));
                bool clash = false;
                for (int k2 = 0; k2 < k; ++k2) {
                    if (home[static_cast<std::size_t>(k2)] == pick) {
                        clash = true;
                        break;
                    }
                }
                if (!clash) break;
            } while (++attempts < 16);
            home[static_cast<std::size_t>(k)] = pick;
        }
        std::vector<int> bound(24);
        for (int h = 0; h < 24; ++h) {
            bound[static_cast<std::size_t>(h)] =
                home[static_cast<std::size_t>(h * segments / 24)];
        }
        // Stable chronotype: the user's daily activity window starts near
        // the same hour every day (wrapping past midnight stays within the
        // calendar day).
        const int window = spec.active_window_hours;
        const double hourly_prob =
            window < 24 ? spec.rate_per_day / window : hourly_rate;
        const int window_start =
            window < 24 ? static_cast<int>(rng.uniform_int(24)) : 0;
        for (int day = 0; day < spec.days; ++day) {
            const bool weekend = weekday_from_days(days_from_civil(2024, 1, 1) +
                                                   day) >= 5;
            int day_start = window_start;
            if (window < 24) {
                // Wobble of one hour either way around the chronotype,
                // plus the slow schedule drift over the corpus span.
                const int drift =
                    spec.chronotype_drift_hours * day / spec.days;
                day_start = (window_start + drift + 23 +
                             static_cast<int>(rng.uniform_int(3))) % 24;
            }
            // At most one check-in per hour slot; the daily count is then
            // Binomial(window, rate/window), i.e. Poisson-like around the
            // daily rate.
            for (int slot = 0; slot < window; ++slot) {
                const int hour = (day_start + slot) % 24;
                if (rng.uniform() >= hourly_prob) continue;
                double rho = spec.rho[static_cast<std::size_t>(hour)];
                if (weekend) rho *= spec.weekend_damping;
                int poi;
                if (rng.uniform() < rho) {
                    poi = bound[static_cast<std::size_t>(hour)];
                } else {
                    poi = static_cast<int>(rng.uniform_int(
                        static_cast<std::uint64_t>(spec.poi_count)));
                }
                // The recorded hour may drift around the actual activity
                // hour, emulating the timestamp uncertainty of voluntary
                // check-ins.
                int recorded = hour;
                if (spec.record_jitter_hours > 0) {
                    const int span = 2 * spec.record_jitter_hours + 1;
                    recorded += static_cast<int>(rng.uniform_int(
                                    static_cast<std::uint64_t>(span))) -
                                spec.record_jitter_hours;
                    recorded = std::clamp(recorded, 0, 23);
                }
                CheckIn c;
                c.user_id = u;
                c.poi_id = poi;
                c.utc_seconds = start + 86400ll * day + 3600ll * recorded +
                                static_cast<std::int64_t>(rng.uniform_int(3600));
                c.lat = poi_lat[static_cast<std::size_t>(poi)];
                c.lon = poi_lon[static_cast<std::size_t>(poi)];
                c.tz_offset_minutes = 0;
                c.effective_offset_minutes = 0;
                out.push_back(c);
            }
        }
    }
    return out;
}

ReturningHistogram returning_probability(const std::vector<CheckIn>& checkins,
                                         double bin_width_hours,
                                         double max_lag_hours,
                                         bool with_day_night_split) {
    if (checkins.empty()) {
        throw DataError("returning_probability: empty corpus");
    }
    if (!(bin_width_hours > 0.0) || !(max_lag_hours > 0.0)) {
        throw ConfigError("returning_probability: widths must be > 0");
    }
    const std::size_t bins = static_cast<std::size_t>(
        std::ceil(max_lag_hours / bin_width_hours));
    ReturningHistogram hist;
    hist.bin_width_hours = bin_width_hours;
    hist.counts.assign(bins, 0);
    hist.daytime_counts.assign(bins, 0);
    hist.nighttime_counts.assign(bins, 0);
    hist.total_checkins = checkins.size();

    // Group visits by (user, poi) and pair within each group; each visit
    // carries its local hour for the day/night split.
    std::map<std::pair<std::int64_t, std::int64_t>,
             std::vector<std::pair<std::int64_t, int>>>
        grouped;
    for (const CheckIn& c : checkins) {
        grouped[{c.user_id, c.poi_id}].push_back(
            {c.utc_seconds, c.local_time().hour});
    }
    for (auto& [key, visits] : grouped) {
        std::sort(visits.begin(), visits.end());
        for (std::size_t i = 0; i < visits.size(); ++i) {
            for (std::size_t j = i + 1; j < visits.size(); ++j) {
                const double lag_hours =
                    static_cast<double>(visits[j].first - visits[i].first) /
                    3600.0;
                if (lag_hours > max_lag_hours) break;
                std::size_t bin = static_cast<std::size_t>(
                    lag_hours / bin_width_hours);
                if (bin >= bins) bin = bins - 1;  // lag == max_lag exactly
                ++hist.counts[bin];
                if (with_day_night_split) {
                    const int h = visits[i].second;
                    if (h >= 6 && h < 18) {
                        ++hist.daytime_counts[bin];
                    } else {
                        ++hist.nighttime_counts[bin];
                    }
                }
            }
        }
    }
    return hist;
}

CorpusStats corpus_stats(const std::vector<CheckIn>& checkins) {
    CorpusStats stats;
    stats.checkins = checkins.size();
    if (checkins.empty()) return stats;

    std::unordered_set<std::int64_t> users, pois;
    std::int64_t lo = checkins.front().utc_seconds;
    std::int64_t hi = lo;
    std::map<std::int64_t, std::vector<std::int64_t>> times_by_user;
    for (const CheckIn& c : checkins) {
        users.insert(c.user_id);
        pois.insert(c.poi_id);
        lo = std::min(lo, c.utc_seconds);
        hi = std::max(hi, c.utc_seconds);
        times_by_user[c.user_id].push_back(c.utc_seconds);
    }
    stats.users = users.size();
    stats.pois = pois.size();
    stats.span_days = static_cast<double>(hi - lo) / 86400.0;

    std::vector<double> gaps;
    for (auto& [_, times] : times_by_user) {
        std::sort(times.begin(), times.end());
        for (std::size_t i = 1; i < times.size(); ++i) {
            gaps.push_back(static_cast<double>(times[i] - times[i - 1]) /
                           3600.0);
        }
    }
    if (!gaps.empty()) {
        std::sort(gaps.begin(), gaps.end());
        const std::size_t n = gaps.size();
        stats.median_gap_hours =
            n % 2 == 1 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
    }
    return stats;
}

}  // namespace replay
