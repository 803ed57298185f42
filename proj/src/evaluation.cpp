#include "replay/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "replay/errors.hpp"

namespace replay {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

int rank_of_truth(std::span<const double> scores, int truth) {
    const double s = scores[static_cast<std::size_t>(truth)];
    int rank = 1;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > s) {
            ++rank;
        } else if (scores[i] == s && static_cast<int>(i) < truth) {
            ++rank;
        }
    }
    return rank;
}

EvaluationReport aggregate_ranks(const std::vector<int>& ranks) {
    EvaluationReport report;
    report.prediction_count = ranks.size();
    report.acc = {{1, 0.0}, {5, 0.0}, {10, 0.0}};
    if (ranks.empty()) return report;
    for (int r : ranks) {
        report.mrr += 1.0 / static_cast<double>(r);
        for (auto& [n, acc] : report.acc) {
            if (r <= n) acc += 1.0;
        }
    }
    const double m = static_cast<double>(ranks.size());
    report.mrr /= m;
    for (auto& [_, acc] : report.acc) acc /= m;
    return report;
}

EvaluationReport evaluate(ReplayModel& model, const SplitCorpus& corpus) {
    model.invalidate_caches();
    const ModelConfig& cfg = model.config();
    const auto sigmas = model.bandwidth_sigmas();

    std::vector<int> ranks;
    struct PeriodAcc {
        double mrr = 0.0;
        double sigma = 0.0;
        std::size_t count = 0;
    };
    std::map<std::string, PeriodAcc> periods;
    std::map<int, PerTimestampStat> per_ts;

    for (int u = 0; u < corpus.user_count(); ++u) {
        const auto& train = corpus.train[static_cast<std::size_t>(u)];
        const auto& test = corpus.test[static_cast<std::size_t>(u)];
        if (test.empty()) continue;

        std::vector<Event> merged = train;
        merged.insert(merged.end(), test.begin(), test.end());
        if (merged.size() < 2) continue;

        SequenceState state;
        for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
            const Event& next = merged[i + 1];
            const CivilTime query = next.local_time();
            PredictionScores scores =
                model.forward_step(u, state, merged[i], query);
            if (i + 1 < train.size()) continue;  // next is still train

            const int rank = rank_of_truth(scores.logits, next.poi);
            ranks.push_back(rank);
            const double rr = 1.0 / static_cast<double>(rank);

            const int slot = transform_timestamp(query, cfg.scheme);
            auto& ts = per_ts[slot];
            ts.mrr += rr;
            ts.count += 1;

            const double sigma =
                sigmas ? (*sigmas)[static_cast<std::size_t>(slot)] : 0.0;
            const bool daytime = query.hour >= 6 && query.hour < 18;
            const bool weekend = query.weekday >= 5;
            for (const char* key : {daytime ? "daytime" : "nighttime",
                                    weekend ? "weekend" : "weekday"}) {
                PeriodAcc& p = periods[key];
                p.mrr += rr;
                p.sigma += sigma;
                p.count += 1;
            }
        }
    }
    if (ranks.empty()) {
        throw DataError("evaluate: test split is empty");
    }

    EvaluationReport report = aggregate_ranks(ranks);
    for (auto& [slot, stat] : per_ts) {
        stat.mrr /= static_cast<double>(stat.count);
        report.per_timestamp[slot] = stat;
    }
    for (const char* key : {"daytime", "nighttime", "weekday", "weekend"}) {
        const PeriodAcc& p = periods[key];
        PeriodStat stat;
        stat.count = p.count;
        if (p.count > 0) {
            stat.mean_mrr = p.mrr / static_cast<double>(p.count);
            if (sigmas) stat.mean_sigma = p.sigma / static_cast<double>(p.count);
        }
        report.per_period[key] = stat;
    }
    return report;
}

BandwidthReport bandwidth_report(const std::vector<double>& sigmas,
                                 const TimestampScheme& scheme) {
    if (sigmas.empty() ||
        sigmas.size() != static_cast<std::size_t>(scheme.timestamp_count)) {
        throw ConfigError(
            "bandwidth_report: no bandwidths exist for this run (variant "
            "without smoothed timestamp embeddings, or table size mismatch)");
    }
    BandwidthReport report;
    report.sigma = sigmas;

    std::array<double, 24> wk_sum{}, we_sum{};
    std::array<std::size_t, 24> wk_n{}, we_n{};
    double day_sum = 0.0, night_sum = 0.0, wk_total = 0.0, we_total = 0.0;
    std::size_t day_n = 0, night_n = 0, wk_tn = 0, we_tn = 0;
    double all_sum = 0.0;

    for (int n = 0; n < scheme.timestamp_count; ++n) {
        const double s = sigmas[static_cast<std::size_t>(n)];
        all_sum += s;
        const int hour = scheme.slot_hour_of_day(n);
        if (hour >= 6 && hour < 18) {
            day_sum += s;
            ++day_n;
        } else {
            night_sum += s;
            ++night_n;
        }
        const auto weekend = scheme.slot_is_weekend(n);
        if (weekend.has_value()) {
            if (*weekend) {
                we_sum[static_cast<std::size_t>(hour)] += s;
                ++we_n[static_cast<std::size_t>(hour)];
                we_total += s;
                ++we_tn;
            } else {
                wk_sum[static_cast<std::size_t>(hour)] += s;
                ++wk_n[static_cast<std::size_t>(hour)];
                wk_total += s;
                ++wk_tn;
            }
        }
    }
    const double all_mean =
        all_sum / static_cast<double>(scheme.timestamp_count);
    report.daytime_mean = day_n ? day_sum / static_cast<double>(day_n) : 0.0;
    report.nighttime_mean =
        night_n ? night_sum / static_cast<double>(night_n) : 0.0;
    report.weekday_mean = wk_tn ? wk_total / static_cast<double>(wk_tn) : all_mean;
    report.weekend_mean = we_tn ? we_total / static_cast<double>(we_tn) : all_mean;
    for (int h = 0; h < 24; ++h) {
        const auto i = static_cast<std::size_t>(h);
        report.weekday_hour_mean[i] =
            wk_n[i] ? wk_sum[i] / static_cast<double>(wk_n[i]) : all_mean;
        report.weekend_hour_mean[i] =
            we_n[i] ? we_sum[i] / static_cast<double>(we_n[i]) : all_mean;
    }
    return report;
}

void write_metrics_csv(const std::string& path, const std::string& variant,
                       const std::string& cell,
                       const EvaluationReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << "variant,cell,acc1,acc5,acc10,mrr\n";
    out << variant << "," << cell << "," << fmt_double(report.acc.at(1)) << ","
        << fmt_double(report.acc.at(5)) << "," << fmt_double(report.acc.at(10))
        << "," << fmt_double(report.mrr) << "\n";
}

void write_per_timestamp_csv(
    const std::string& path, const EvaluationReport& report,
    const std::optional<std::vector<double>>& sigmas) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << "n,mrr,count,sigma\n";
    for (const auto& [slot, stat] : report.per_timestamp) {
        out << slot << "," << fmt_double(stat.mrr) << "," << stat.count << ",";
        if (sigmas) {
            out << fmt_double((*sigmas)[static_cast<std::size_t>(slot)]);
        }
        out << "\n";
    }
}

void write_bandwidths_csv(const std::string& path,
                          const std::vector<double>& sigmas) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << "n,sigma\n";
    for (std::size_t n = 0; n < sigmas.size(); ++n) {
        out << n << "," << fmt_double(sigmas[n]) << "\n";
    }
}

void write_returning_csv(const std::string& path,
                         const ReturningHistogram& hist) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << "lag_hours,probability,daytime,nighttime\n";
    const double total = static_cast<double>(hist.total_checkins);
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        const double lag = static_cast<double>(b) * hist.bin_width_hours;
        out << fmt_double(lag) << ","
            << fmt_double(static_cast<double>(hist.counts[b]) / total) << ","
            << fmt_double(static_cast<double>(hist.daytime_counts[b]) / total)
            << ","
            << fmt_double(static_cast<double>(hist.nighttime_counts[b]) / total)
            << "\n";
    }
}

void write_stats_csv(const std::string& path, const CorpusStats& stats) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << "users,pois,checkins,span_days,median_gap_hours\n";
    out << stats.users << "," << stats.pois << "," << stats.checkins << ","
        << fmt_double(stats.span_days) << ",";
    if (stats.median_gap_hours) out << fmt_double(*stats.median_gap_hours);
    out << "\n";
}

}  // namespace replay
