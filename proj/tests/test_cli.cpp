// End-to-end tests driving the real binary (path in $REPLAY_BIN).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* env = std::getenv("REPLAY_BIN");
    REQUIRE_MESSAGE(env != nullptr, "REPLAY_BIN not set");
    return env;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("replay_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

int run(const std::string& args, const std::string& log) {
    const std::string cmd = binary() + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

const char* kSmallSynthConfig =
    "synth.users = 8\n"
    "synth.pois = 15\n"
    "synth.days = 20\n"
    "synth.rate_per_day = 3\n"
    "synth.rho.default = 0.7\n"
    "train.epochs = 10\n"
    "optim.learning_rate = 0.02\n";

}  // namespace

TEST_CASE("generate is deterministic and reports stats") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    CHECK(run("generate --config " + dir.file("cfg") + " --seed 5 --out " +
                  dir.file("a"),
              dir.file("log_a")) == 0);
    CHECK(run("generate --config " + dir.file("cfg") + " --seed 5 --out " +
                  dir.file("b"),
              dir.file("log_b")) == 0);
    const std::string ca = slurp(dir.file("a") + "/corpus.csv");
    CHECK(!ca.empty());
    CHECK(ca == slurp(dir.file("b") + "/corpus.csv"));
    CHECK(fs::exists(dir.file("a") + "/stats.csv"));

    // Different seed, different corpus.
    CHECK(run("generate --config " + dir.file("cfg") + " --seed 6 --out " +
                  dir.file("c"),
              dir.file("log_c")) == 0);
    CHECK(ca != slurp(dir.file("c") + "/corpus.csv"));
}

TEST_CASE("generate with zero users warns and writes an empty corpus") {
    TempDir dir;
    write_file(dir.file("cfg"), "synth.users = 0\n");
    CHECK(run("generate --config " + dir.file("cfg") + " --seed 1 --out " +
                  dir.file("out"),
              dir.file("log")) == 0);
    CHECK(slurp(dir.file("out") + "/corpus.csv").empty());
    CHECK(slurp(dir.file("log")).find("warning") != std::string::npos);
}

TEST_CASE("a seed is mandatory") {
    TempDir dir;
    CHECK(run("generate --out " + dir.file("out"), dir.file("log")) == 1);
    CHECK(slurp(dir.file("log")).find("seed") != std::string::npos);
}

TEST_CASE("unknown variants and bad configs exit with code 1") {
    TempDir dir;
    CHECK(run("train --seed 1 --variant nonsense --data x --out " +
                  dir.file("out"),
              dir.file("log")) == 1);
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 1 --out " +
                    dir.file("gen"),
                dir.file("log_gen")) == 0);
    CHECK(run("train --seed 1 --cell perceptron --data " + dir.file("gen") +
                  "/corpus.csv --out " + dir.file("out2"),
              dir.file("log2")) == 1);
}

TEST_CASE("missing or malformed data exits with code 2") {
    TempDir dir;
    CHECK(run("analyze --seed 1 --data " + dir.file("missing.csv") +
                  " --out " + dir.file("out"),
              dir.file("log")) == 2);
    write_file(dir.file("bad.csv"), "1,2,not-a-time,0,0\n");
    CHECK(run("analyze --seed 1 --data " + dir.file("bad.csv") + " --out " +
                  dir.file("out"),
              dir.file("log2")) == 2);
}

TEST_CASE("train, evaluate and analyze produce the documented files") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 9 --out " +
                    dir.file("gen"),
                dir.file("log0")) == 0);
    const std::string data = dir.file("gen") + "/corpus.csv";

    REQUIRE(run("train --config " + dir.file("cfg") + " --seed 9 --data " +
                    data + " --out " + dir.file("run"),
                dir.file("log1")) == 0);
    CHECK(fs::exists(dir.file("run") + "/checkpoint.bin"));
    CHECK(line_count(dir.file("run") + "/loss.csv") == 11);  // header + 10

    REQUIRE(run("evaluate --config " + dir.file("cfg") + " --seed 9 --data " +
                    data + " --checkpoint " + dir.file("run") +
                    "/checkpoint.bin --out " + dir.file("eval"),
                dir.file("log2")) == 0);
    CHECK(fs::exists(dir.file("eval") + "/metrics.csv"));
    CHECK(fs::exists(dir.file("eval") + "/per_timestamp.csv"));
    CHECK(fs::exists(dir.file("eval") + "/bandwidths.csv"));
    CHECK(line_count(dir.file("eval") + "/bandwidths.csv") == 169);

    REQUIRE(run("analyze --seed 9 --data " + data + " --out " +
                    dir.file("analysis"),
                dir.file("log3")) == 0);
    CHECK(fs::exists(dir.file("analysis") + "/returning.csv"));
    CHECK(fs::exists(dir.file("analysis") + "/stats.csv"));
    CHECK(line_count(dir.file("analysis") + "/returning.csv") == 169);
}

TEST_CASE("loss log trends downward over training") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 11 --out " +
                    dir.file("gen"),
                dir.file("log0")) == 0);
    REQUIRE(run("train --config " + dir.file("cfg") + " --seed 11 --data " +
                    dir.file("gen") + "/corpus.csv --out " + dir.file("run"),
                dir.file("log1")) == 0);
    std::ifstream in(dir.file("run") + "/loss.csv");
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> losses;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        losses.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    REQUIRE(losses.size() == 10);
    CHECK(losses.back() < losses.front());
}

TEST_CASE("identical runs produce bit-identical outputs") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 13 --out " +
                    dir.file("gen"),
                dir.file("log0")) == 0);
    const std::string data = dir.file("gen") + "/corpus.csv";
    for (const char* tag : {"r1", "r2"}) {
        REQUIRE(run("train --config " + dir.file("cfg") + " --seed 13 --data " +
                        data + " --out " + dir.file(tag),
                    dir.file(std::string("log_") + tag)) == 0);
    }
    CHECK(slurp(dir.file("r1") + "/checkpoint.bin") ==
          slurp(dir.file("r2") + "/checkpoint.bin"));
    CHECK(slurp(dir.file("r1") + "/loss.csv") ==
          slurp(dir.file("r2") + "/loss.csv"));
}

TEST_CASE("resuming reproduces the uninterrupted trajectory bit for bit") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 17 --out " +
                    dir.file("gen"),
                dir.file("log0")) == 0);
    const std::string data = dir.file("gen") + "/corpus.csv";

    REQUIRE(run("train --config " + dir.file("cfg") +
                    " --seed 17 --epochs 6 --data " + data + " --out " +
                    dir.file("full"),
                dir.file("log1")) == 0);
    REQUIRE(run("train --config " + dir.file("cfg") +
                    " --seed 17 --epochs 3 --data " + data + " --out " +
                    dir.file("half"),
                dir.file("log2")) == 0);
    REQUIRE(run("train --config " + dir.file("cfg") +
                    " --seed 17 --epochs 6 --data " + data + " --resume " +
                    dir.file("half") + "/checkpoint.bin --out " +
                    dir.file("resumed"),
                dir.file("log3")) == 0);

    CHECK(slurp(dir.file("full") + "/checkpoint.bin") ==
          slurp(dir.file("resumed") + "/checkpoint.bin"));

    // The resumed loss log holds epochs 4..6 and must match the tail of
    // the uninterrupted log.
    std::ifstream full_log(dir.file("full") + "/loss.csv");
    std::ifstream res_log(dir.file("resumed") + "/loss.csv");
    std::vector<std::string> full_lines, res_lines;
    std::string line;
    while (std::getline(full_log, line)) full_lines.push_back(line);
    while (std::getline(res_log, line)) res_lines.push_back(line);
    REQUIRE(full_lines.size() == 7);
    REQUIRE(res_lines.size() == 4);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(res_lines[1 + i] == full_lines[4 + i]);
    }
}

TEST_CASE("epochs zero saves the initialization and an empty loss log") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 19 --out " +
                    dir.file("gen"),
                dir.file("log0")) == 0);
    REQUIRE(run("train --config " + dir.file("cfg") +
                    " --seed 19 --epochs 0 --data " + dir.file("gen") +
                    "/corpus.csv --out " + dir.file("run"),
                dir.file("log1")) == 0);
    CHECK(fs::exists(dir.file("run") + "/checkpoint.bin"));
    CHECK(line_count(dir.file("run") + "/loss.csv") == 1);  // header only
}

TEST_CASE("evaluate rejects a checkpoint with mismatched shapes") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 23 --out " +
                    dir.file("gen"),
                dir.file("log0")) == 0);
    const std::string data = dir.file("gen") + "/corpus.csv";
    REQUIRE(run("train --config " + dir.file("cfg") +
                    " --seed 23 --epochs 1 --data " + data + " --out " +
                    dir.file("run"),
                dir.file("log1")) == 0);
    // An lstm expects differently shaped cell weights.
    CHECK(run("evaluate --config " + dir.file("cfg") +
                  " --seed 23 --cell lstm --data " + data + " --checkpoint " +
                  dir.file("run") + "/checkpoint.bin --out " + dir.file("eval"),
              dir.file("log2")) == 1);
    CHECK(slurp(dir.file("log2")).find("shape") != std::string::npos);
}

TEST_CASE("flashback variant evaluates without a bandwidth report") {
    TempDir dir;
    write_file(dir.file("cfg"), kSmallSynthConfig);
    REQUIRE(run("generate --config " + dir.file("cfg") + " --seed 29 --out " +
                    dir.file("gen"),
                dir.file("log0")) == 0);
    const std::string data = dir.file("gen") + "/corpus.csv";
    REQUIRE(run("train --config " + dir.file("cfg") +
                    " --seed 29 --epochs 2 --variant flashback --data " +
                    data + " --out " + dir.file("run"),
                dir.file("log1")) == 0);
    REQUIRE(run("evaluate --config " + dir.file("cfg") +
                    " --seed 29 --variant flashback --data " + data +
                    " --checkpoint " + dir.file("run") +
                    "/checkpoint.bin --out " + dir.file("eval"),
                dir.file("log2")) == 0);
    CHECK(fs::exists(dir.file("eval") + "/metrics.csv"));
    CHECK_FALSE(fs::exists(dir.file("eval") + "/bandwidths.csv"));
    CHECK(slurp(dir.file("eval") + "/metrics.csv").find("flashback") !=
          std::string::npos);
}
