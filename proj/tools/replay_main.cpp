// Command-line entry point: generate | train | evaluate | analyze.
// Configuration comes from an optional key=value file plus flag
// overrides; flags win. Every command is deterministic under
// (config, seed). Exit codes: 0 success, 1 usage/config error,
// 2 data error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "replay/checkpoint.hpp"
#include "replay/config.hpp"
#include "replay/errors.hpp"
#include "replay/evaluation.hpp"

namespace fs = std::filesystem;
using namespace replay;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string variant;
    std::string cell;
    std::string time_scale;
    std::string time_granularity;
    std::optional<int> epochs;
    std::string out_dir;
    std::string data_path;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_data) {
    cmd->add_option("--config", args.config_path, "key=value config file");
    cmd->add_option("--seed", args.seed, "master RNG seed (required)");
    cmd->add_option("--variant", args.variant,
                    "replay | noste | noqt | flashback | multig | fixedb");
    cmd->add_option("--cell", args.cell, "vanilla | lstm | gru");
    cmd->add_option("--time-scale", args.time_scale,
                    "day | weekday_weekend | week");
    cmd->add_option("--time-granularity", args.time_granularity,
                    "hour | minute");
    cmd->add_option("--epochs", args.epochs, "training epochs");
    cmd->add_option("--out", args.out_dir, "output directory");
    if (with_data) {
        cmd->add_option("--data", args.data_path, "check-in corpus file");
    }
}

/// Merges the config file with flag overrides; flags win. The seed is
/// mandatory: determinism is a feature, not an option.
KeyValueConfig merge_config(const CommonArgs& args) {
    KeyValueConfig kv;
    if (!args.config_path.empty()) {
        kv = KeyValueConfig::from_file(args.config_path);
    }
    if (!args.variant.empty()) apply_variant(kv, args.variant);
    if (args.seed) kv.set("run.seed", std::to_string(*args.seed));
    if (!args.cell.empty()) kv.set("model.cell", args.cell);
    if (!args.time_scale.empty()) kv.set("time.scale", args.time_scale);
    if (!args.time_granularity.empty()) {
        kv.set("time.granularity", args.time_granularity);
    }
    if (args.epochs) kv.set("train.epochs", std::to_string(*args.epochs));
    if (!args.out_dir.empty()) kv.set("out.dir", args.out_dir);
    if (!args.data_path.empty()) kv.set("data.path", args.data_path);
    if (!kv.has("run.seed")) {
        throw ConfigError("a seed is required (--seed or run.seed)");
    }
    return kv;
}

std::string require_out_dir(const KeyValueConfig& kv) {
    const std::string dir = kv.get_string("out.dir", "");
    if (dir.empty()) throw ConfigError("an output directory is required (--out or out.dir)");
    fs::create_directories(dir);
    return dir;
}

std::vector<CheckIn> load_corpus(const KeyValueConfig& kv,
                                 IngestReport* report = nullptr) {
    const std::string path = kv.get_string("data.path", "");
    if (path.empty()) throw ConfigError("a corpus file is required (--data or data.path)");
    IngestOptions options;
    const std::string delim = kv.get_string("data.delimiter", ",");
    if (delim.size() != 1) {
        throw ConfigError("data.delimiter must be a single character");
    }
    options.delimiter = delim[0];
    return ingest(path, options, report);
}

SplitCorpus split_from_config(const KeyValueConfig& kv,
                              const std::vector<CheckIn>& checkins) {
    return split_chronological(
        checkins, kv.get_double("data.train_fraction", 0.8),
        static_cast<std::size_t>(kv.get_int("data.min_checkins", 5)));
}

int cmd_generate(const CommonArgs& args) {
    const KeyValueConfig kv = merge_config(args);
    const std::uint64_t seed = kv.get_u64("run.seed", 0);
    const std::string dir = require_out_dir(kv);

    const SyntheticSpec spec = synthetic_spec_from(kv, seed);
    const std::vector<CheckIn> corpus = generate_synthetic(spec);
    const std::string corpus_path = dir + "/corpus.csv";
    write_checkins(corpus_path, corpus);

    const CorpusStats stats = corpus_stats(corpus);
    write_stats_csv(dir + "/stats.csv", stats);
    if (corpus.empty()) {
        std::cerr << "warning: generated corpus is empty\n";
    }
    std::cout << "generated " << stats.checkins << " check-ins for "
              << stats.users << " users over " << stats.pois << " POIs -> "
              << corpus_path << "\n";
    std::cout << "span " << stats.span_days << " days, median gap ";
    if (stats.median_gap_hours) {
        std::cout << *stats.median_gap_hours << " hours\n";
    } else {
        std::cout << "n/a\n";
    }
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& resume_path) {
    const KeyValueConfig kv = merge_config(args);
    const std::uint64_t seed = kv.get_u64("run.seed", 0);
    const std::string dir = require_out_dir(kv);

    const std::vector<CheckIn> checkins = load_corpus(kv);
    const SplitCorpus corpus = split_from_config(kv, checkins);
    if (corpus.user_count() == 0) {
        throw DataError("no users survive the minimum check-in filter");
    }

    const ModelConfig cfg =
        model_config_from(kv, corpus.poi_count(), corpus.user_count());
    ParameterStore params;
    ReplayModel::init_params(cfg, params, seed);
    AdamOptimizer optimizer(optimizer_from_config(kv));

    std::uint64_t first_epoch = 0;
    if (!resume_path.empty()) {
        const CheckpointHeader header = load_checkpoint(resume_path, params);
        optimizer.set_steps_taken(header.adam_steps);
        first_epoch = header.epochs_completed;
    }

    ReplayModel model(cfg, params);
    const auto epochs =
        static_cast<std::uint64_t>(kv.get_int("train.epochs", 20));
    const int save_interval = kv.get_int("train.save_interval", 0);

    std::ofstream loss_log(dir + "/loss.csv", std::ios::trunc);
    if (!loss_log) throw DataError("cannot write " + dir + "/loss.csv");
    loss_log << "epoch,mean_loss,steps\n";

    auto save = [&](std::uint64_t epochs_done, const std::string& path) {
        CheckpointHeader header;
        header.seed = seed;
        header.epochs_completed = epochs_done;
        header.adam_steps = optimizer.steps_taken();
        save_checkpoint(path, params, header);
    };

    for (std::uint64_t e = first_epoch; e < epochs; ++e) {
        const EpochStats stats =
            model.train_epoch(corpus.train, optimizer, seed, e);
        char line[128];
        std::snprintf(line, sizeof(line), "%llu,%.17g,%zu\n",
                      static_cast<unsigned long long>(e + 1), stats.mean_loss,
                      stats.steps);
        loss_log << line;
        loss_log.flush();
        std::cout << "epoch " << (e + 1) << "/" << epochs << " mean loss "
                  << stats.mean_loss << "\n";
        if (save_interval > 0 &&
            (e + 1) % static_cast<std::uint64_t>(save_interval) == 0) {
            save(e + 1, dir + "/checkpoint_epoch" + std::to_string(e + 1) +
                            ".bin");
        }
    }
    save(epochs, dir + "/checkpoint.bin");
    std::cout << "checkpoint -> " << dir << "/checkpoint.bin\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& checkpoint_path) {
    const KeyValueConfig kv = merge_config(args);
    const std::string dir = require_out_dir(kv);
    if (checkpoint_path.empty()) {
        throw ConfigError("evaluate requires --checkpoint");
    }

    const std::vector<CheckIn> checkins = load_corpus(kv);
    const SplitCorpus corpus = split_from_config(kv, checkins);
    const ModelConfig cfg =
        model_config_from(kv, corpus.poi_count(), corpus.user_count());
    ParameterStore params;
    ReplayModel::init_params(cfg, params, kv.get_u64("run.seed", 0));
    load_checkpoint(checkpoint_path, params);

    ReplayModel model(cfg, params);
    const EvaluationReport report = evaluate(model, corpus);
    const auto sigmas = model.bandwidth_sigmas();

    write_metrics_csv(dir + "/metrics.csv", cfg.variant_name(),
                      to_string(cfg.cell), report);
    write_per_timestamp_csv(dir + "/per_timestamp.csv", report, sigmas);
    if (sigmas) write_bandwidths_csv(dir + "/bandwidths.csv", *sigmas);

    std::cout << "predictions " << report.prediction_count << " acc@1 "
              << report.acc.at(1) << " acc@5 " << report.acc.at(5)
              << " acc@10 " << report.acc.at(10) << " mrr " << report.mrr
              << "\n";
    return 0;
}

int cmd_analyze(const CommonArgs& args) {
    const KeyValueConfig kv = merge_config(args);
    const std::string dir = require_out_dir(kv);

    IngestReport ingest_report;
    const std::vector<CheckIn> checkins = load_corpus(kv, &ingest_report);
    if (checkins.empty()) throw DataError("analyze: empty corpus");

    const ReturningHistogram hist = returning_probability(
        checkins, kv.get_double("analyze.bin_width_hours", 1.0),
        kv.get_double("analyze.max_lag_hours", 168.0), true);
    write_returning_csv(dir + "/returning.csv", hist);
    write_stats_csv(dir + "/stats.csv", corpus_stats(checkins));
    std::cout << "analysis -> " << dir << "/returning.csv, " << dir
              << "/stats.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"location prediction over sparse check-in trajectories"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, eval_args, analyze_args;
    std::string resume_path, checkpoint_path;

    CLI::App* gen = app.add_subcommand("generate", "generate a synthetic corpus");
    add_common_flags(gen, gen_args, false);

    CLI::App* train = app.add_subcommand("train", "train a model");
    add_common_flags(train, train_args, true);
    train->add_option("--resume", resume_path, "checkpoint to resume from");

    CLI::App* eval = app.add_subcommand("evaluate", "evaluate a checkpoint");
    add_common_flags(eval, eval_args, true);
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint to load");

    CLI::App* analyze =
        app.add_subcommand("analyze", "corpus statistics and returning probability");
    add_common_flags(analyze, analyze_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_args);
        if (train->parsed()) return cmd_train(train_args, resume_path);
        if (eval->parsed()) return cmd_evaluate(eval_args, checkpoint_path);
        if (analyze->parsed()) return cmd_analyze(analyze_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
