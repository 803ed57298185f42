// Ranking metrics (MRR, Acc@N) over teacher-forced next-location
// predictions, per-timestamp and per-period breakdowns, and the learnt
// bandwidth report.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "replay/data.hpp"
#include "replay/model.hpp"

namespace replay {

/// 1-based rank of the true POI under descending score, ties broken by
/// ascending POI id.
int rank_of_truth(std::span<const double> scores, int truth);

struct PerTimestampStat {
    double mrr = 0.0;
    std::size_t count = 0;
};

struct PeriodStat {
    double mean_mrr = 0.0;
    std::optional<double> mean_sigma;  // absent without bandwidths
    std::size_t count = 0;
};

struct EvaluationReport {
    std::map<int, double> acc;  // N in {1, 5, 10}
    double mrr = 0.0;
    std::size_t prediction_count = 0;
    std::map<int, PerTimestampStat> per_timestamp;     // keyed by slot
    std::map<std::string, PeriodStat> per_period;      // daytime/nighttime/
                                                       // weekday/weekend
};

/// Aggregates a list of ranks into MRR and Acc@{1,5,10}.
EvaluationReport aggregate_ranks(const std::vector<int>& ranks);

/// Teacher-forced evaluation: one prediction per test check-in, context
/// from the user's train prefix plus earlier test check-ins, query time
/// equal to the test check-in's own timestamp. Throws DataError when the
/// test split is empty.
EvaluationReport evaluate(ReplayModel& model, const SplitCorpus& corpus);

struct BandwidthReport {
    std::vector<double> sigma;  // per slot
    std::array<double, 24> weekday_hour_mean{};
    std::array<double, 24> weekend_hour_mean{};
    double daytime_mean = 0.0;    // hours 6-18
    double nighttime_mean = 0.0;  // hours 18-6
    double weekday_mean = 0.0;
    double weekend_mean = 0.0;
};

/// Period means over the effective per-slot bandwidths. For the day scale,
/// which carries no weekday information, the weekday/weekend entries equal
/// the overall mean. Throws ConfigError when sigmas is empty (variant
/// without bandwidths).
BandwidthReport bandwidth_report(const std::vector<double>& sigmas,
                                 const TimestampScheme& scheme);

// CSV exports. Doubles are printed with 17 significant digits so files
// reload to identical values.
void write_metrics_csv(const std::string& path, const std::string& variant,
                       const std::string& cell, const EvaluationReport& report);
void write_per_timestamp_csv(const std::string& path,
                             const EvaluationReport& report,
                             const std::optional<std::vector<double>>& sigmas);
void write_bandwidths_csv(const std::string& path,
                          const std::vector<double>& sigmas);
void write_returning_csv(const std::string& path,
                         const ReturningHistogram& hist);
void write_stats_csv(const std::string& path, const CorpusStats& stats);

}  // namespace replay
