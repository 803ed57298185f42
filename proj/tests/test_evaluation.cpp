#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "replay/errors.hpp"
#include "replay/evaluation.hpp"
#include "replay/rng.hpp"

using namespace replay;
namespace fs = std::filesystem;

namespace {

// Oracle: full sort with the same tie rule, then find the truth.
int rank_by_sorting(const std::vector<double>& scores, int truth) {
    std::vector<int> ids(scores.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] !=
            scores[static_cast<std::size_t>(b)]) {
            return scores[static_cast<std::size_t>(a)] >
                   scores[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        if (ids[pos] == truth) return static_cast<int>(pos) + 1;
    }
    return -1;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("replay_eval_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

}  // namespace

TEST_CASE("rank_of_truth basics") {
    CHECK(rank_of_truth(std::vector<double>{0.9, 0.1, 0.2}, 0) == 1);
    CHECK(rank_of_truth(std::vector<double>{0.2, 0.5, 0.3}, 0) == 3);
    // All equal: tie break by ascending id.
    CHECK(rank_of_truth(std::vector<double>{0.5, 0.5, 0.5, 0.5}, 2) == 3);
}

TEST_CASE("rank_of_truth equals the sort oracle on 1000 random vectors") {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(40);
        std::vector<double> scores(n);
        for (double& s : scores) {
            // Coarse grid so ties actually occur.
            s = static_cast<double>(rng.uniform_int(8)) / 4.0;
        }
        const int truth = static_cast<int>(rng.uniform_int(n));
        CHECK(rank_of_truth(scores, truth) == rank_by_sorting(scores, truth));
    }
}

TEST_CASE("rank is invariant under strictly increasing transforms") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng.uniform_int(20);
        std::vector<double> scores(n), warped(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform(-2.0, 2.0);
            warped[i] = std::exp(scores[i]) + 3.0;
        }
        const int truth = static_cast<int>(rng.uniform_int(n));
        CHECK(rank_of_truth(scores, truth) == rank_of_truth(warped, truth));
    }
}

TEST_CASE("aggregate_ranks hand values") {
    const EvaluationReport one = aggregate_ranks({1});
    CHECK(one.mrr == doctest::Approx(1.0));
    CHECK(one.acc.at(1) == doctest::Approx(1.0));
    CHECK(one.acc.at(10) == doctest::Approx(1.0));

    const EvaluationReport r = aggregate_ranks({1, 2, 4});
    CHECK(r.mrr == doctest::Approx(0.583333333333).epsilon(1e-9));
    CHECK(r.acc.at(1) == doctest::Approx(1.0 / 3));
    CHECK(r.acc.at(5) == doctest::Approx(1.0));

    const EvaluationReport far = aggregate_ranks({11});
    CHECK(far.acc.at(10) == 0.0);
    CHECK(far.mrr == doctest::Approx(1.0 / 11));
}

TEST_CASE("acc is monotone in N and bounded by mrr from below") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> ranks;
        const std::size_t m = 1 + rng.uniform_int(50);
        for (std::size_t i = 0; i < m; ++i) {
            ranks.push_back(1 + static_cast<int>(rng.uniform_int(30)));
        }
        const EvaluationReport r = aggregate_ranks(ranks);
        CHECK(r.acc.at(1) <= r.acc.at(5));
        CHECK(r.acc.at(5) <= r.acc.at(10));
        CHECK(r.acc.at(1) <= r.mrr + 1e-12);
        CHECK(r.mrr <= 1.0);
    }
}

namespace {

SplitCorpus tiny_split_corpus() {
    SyntheticSpec spec;
    spec.user_count = 6;
    spec.poi_count = 10;
    spec.days = 25;
    spec.rate_per_day = 2.0;
    spec.seed = 17;
    return split_chronological(generate_synthetic(spec));
}

}  // namespace

TEST_CASE("evaluate produces one prediction per test check-in") {
    const SplitCorpus corpus = tiny_split_corpus();
    ModelConfig cfg;
    cfg.poi_count = corpus.poi_count();
    cfg.user_count = corpus.user_count();
    ParameterStore params;
    ReplayModel::init_params(cfg, params, 23);
    ReplayModel model(cfg, params);

    const EvaluationReport report = evaluate(model, corpus);
    std::size_t want = 0;
    for (const auto& t : corpus.test) want += t.size();
    CHECK(report.prediction_count == want);
    CHECK(report.acc.at(1) <= report.acc.at(5));
    CHECK(report.acc.at(5) <= report.acc.at(10));
    CHECK(report.acc.at(1) <= report.mrr + 1e-12);

    std::size_t ts_total = 0;
    for (const auto& [slot, stat] : report.per_timestamp) {
        CHECK(slot >= 0);
        CHECK(slot < cfg.scheme.timestamp_count);
        ts_total += stat.count;
    }
    CHECK(ts_total == want);
    CHECK(report.per_period.at("daytime").count +
              report.per_period.at("nighttime").count ==
          want);
    CHECK(report.per_period.at("weekday").count +
              report.per_period.at("weekend").count ==
          want);
    // Bandwidths exist for the full model, so period sigmas are present.
    CHECK(report.per_period.at("daytime").mean_sigma.has_value());
}

TEST_CASE("evaluate throws on an empty test split") {
    SplitCorpus corpus = tiny_split_corpus();
    for (auto& t : corpus.test) t.clear();
    ModelConfig cfg;
    cfg.poi_count = corpus.poi_count();
    cfg.user_count = corpus.user_count();
    ParameterStore params;
    ReplayModel::init_params(cfg, params, 23);
    ReplayModel model(cfg, params);
    CHECK_THROWS_AS(evaluate(model, corpus), DataError);
}

TEST_CASE("bandwidth report splits periods") {
    const auto scheme =
        TimestampScheme::make(TimeScale::week, TimeGranularity::hour);
    std::vector<double> sigmas(168, 1.0);
    // Mark daytime slots with sigma 2 and weekend slots with sigma 4.
    for (int n = 0; n < 168; ++n) {
        const int hour = scheme.slot_hour_of_day(n);
        if (hour >= 6 && hour < 18) sigmas[static_cast<std::size_t>(n)] = 2.0;
        if (*scheme.slot_is_weekend(n)) sigmas[static_cast<std::size_t>(n)] = 4.0;
    }
    const BandwidthReport report = bandwidth_report(sigmas, scheme);
    CHECK(report.weekend_mean == doctest::Approx(4.0));
    CHECK(report.weekday_mean < report.weekend_mean);
    CHECK(report.daytime_mean > 1.0);
    for (int h = 0; h < 24; ++h) {
        CHECK(report.weekend_hour_mean[static_cast<std::size_t>(h)] ==
              doctest::Approx(4.0));
    }

    // All-equal sigmas: every mean equals that value.
    const BandwidthReport flat = bandwidth_report(
        std::vector<double>(168, 0.7), scheme);
    CHECK(flat.daytime_mean == doctest::Approx(0.7));
    CHECK(flat.nighttime_mean == doctest::Approx(0.7));
    CHECK(flat.weekday_mean == doctest::Approx(0.7));
    CHECK(flat.weekend_mean == doctest::Approx(0.7));
}

TEST_CASE("bandwidth report rejects variants without bandwidths") {
    const auto scheme =
        TimestampScheme::make(TimeScale::week, TimeGranularity::hour);
    CHECK_THROWS_AS(bandwidth_report({}, scheme), ConfigError);
}

TEST_CASE("fixed-bandwidth model reports the fixed value everywhere") {
    const SplitCorpus corpus = tiny_split_corpus();
    ModelConfig cfg;
    cfg.poi_count = corpus.poi_count();
    cfg.user_count = corpus.user_count();
    cfg.fixed_bandwidth = 2.5;
    ParameterStore params;
    ReplayModel::init_params(cfg, params, 29);
    ReplayModel model(cfg, params);
    const auto sigmas = model.bandwidth_sigmas();
    REQUIRE(sigmas.has_value());
    for (double s : *sigmas) CHECK(s == 2.5);
}

TEST_CASE("noste model has no bandwidths to report") {
    const SplitCorpus corpus = tiny_split_corpus();
    ModelConfig cfg;
    cfg.poi_count = corpus.poi_count();
    cfg.user_count = corpus.user_count();
    cfg.use_ste = false;
    ParameterStore params;
    ReplayModel::init_params(cfg, params, 31);
    ReplayModel model(cfg, params);
    CHECK_FALSE(model.bandwidth_sigmas().has_value());
}

TEST_CASE("csv exports reload to identical aggregates") {
    TempDir dir;
    const EvaluationReport report = aggregate_ranks({1, 2, 4, 7, 1, 13});
    const std::string path = dir.file("metrics.csv");
    write_metrics_csv(path, "replay", "vanilla", report);

    std::ifstream in(path);
    std::string header, row;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, row));
    CHECK(header == "variant,cell,acc1,acc5,acc10,mrr");
    std::stringstream ss(row);
    std::string variant, cell, f1, f5, f10, fm;
    std::getline(ss, variant, ',');
    std::getline(ss, cell, ',');
    std::getline(ss, f1, ',');
    std::getline(ss, f5, ',');
    std::getline(ss, f10, ',');
    std::getline(ss, fm, ',');
    CHECK(variant == "replay");
    CHECK(std::stod(f1) == report.acc.at(1));
    CHECK(std::stod(f5) == report.acc.at(5));
    CHECK(std::stod(f10) == report.acc.at(10));
    CHECK(std::stod(fm) == report.mrr);
}

TEST_CASE("bandwidths csv round trips exactly") {
    TempDir dir;
    Rng rng(37);
    std::vector<double> sigmas(24);
    for (double& s : sigmas) s = std::exp(rng.uniform(-2.0, 2.0));
    const std::string path = dir.file("bandwidths.csv");
    write_bandwidths_csv(path, sigmas);

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "n,sigma");
    for (std::size_t n = 0; n < sigmas.size(); ++n) {
        REQUIRE(std::getline(in, line));
        const auto comma = line.find(',');
        CHECK(std::stoul(line.substr(0, comma)) == n);
        CHECK(std::stod(line.substr(comma + 1)) == sigmas[n]);
    }
}
