#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "peacegrid/cli.hpp"

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "peacegrid");
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& arg : args) argv.push_back(arg.c_str());
    return peacegrid::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string fixture(const std::string& name) {
    return std::string(PEACEGRID_FIXTURES_DIR) + "/" + name;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(static_cast<bool>(out));
    out << content;
}

// Restores the prior state of an environment variable on scope exit.
class EnvGuard {
public:
    explicit EnvGuard(const char* name) : name_(name) {
        const char* value = std::getenv(name);
        had_ = value != nullptr;
        if (had_) value_ = value;
    }
    ~EnvGuard() {
        if (had_)
            ::setenv(name_, value_.c_str(), 1);
        else
            ::unsetenv(name_);
    }
    EnvGuard(const EnvGuard&) = delete;
    EnvGuard& operator=(const EnvGuard&) = delete;

private:
    const char* name_;
    bool had_ = false;
    std::string value_;
};

}  // namespace

TEST_CASE("argument errors exit with code 2") {
    CHECK(run({}) == 2);
    CHECK(run({"frobnicate"}) == 2);
    CHECK(run({"--no-such-flag"}) == 2);
    CHECK(run({"evaluate"}) == 2);
    CHECK(run({"synth"}) == 2);
}

TEST_CASE("help exits with code 0") {
    CHECK(run({"--help"}) == 0);
    CHECK(run({"evaluate", "--help"}) == 0);
}

TEST_CASE("ingest rejects a missing articles file") {
    CHECK(run({"ingest", "--articles", "/no/such/articles.jsonl", "--labels",
               fixture("reference_labels.csv")}) == 2);
}

TEST_CASE("evaluate needs a store or a percentages fixture") {
    oracle::TempDir tmp("pg-cli");
    CHECK(run({"evaluate", "--labels", fixture("reference_labels.csv"), "--out",
               tmp.file("reports")}) == 2);
    CHECK(!std::filesystem::exists(tmp.file("reports")));
}

TEST_CASE("evaluate rejects an out-of-range threshold before writing anything") {
    oracle::TempDir tmp("pg-cli");
    const std::string out_dir = tmp.file("reports");
    CHECK(run({"evaluate", "--fixture-percentages", fixture("reference_percentages.csv"),
               "--labels", fixture("reference_labels.csv"), "--out", out_dir, "--threshold",
               "1.5"}) == 2);
    CHECK(!std::filesystem::exists(out_dir));
}

TEST_CASE("evaluate rejects an unknown decision rule") {
    oracle::TempDir tmp("pg-cli");
    CHECK(run({"evaluate", "--fixture-percentages", fixture("reference_percentages.csv"),
               "--labels", fixture("reference_labels.csv"), "--out", tmp.file("reports"),
               "--rule", "coin_flip"}) == 2);
}

TEST_CASE("evaluate aggregates a percentages fixture into reports") {
    oracle::TempDir tmp("pg-cli");
    const std::string out_dir = tmp.file("reports");
    CHECK(run({"evaluate", "--fixture-percentages", fixture("reference_percentages.csv"),
               "--labels", fixture("reference_labels.csv"), "--out", out_dir}) == 0);
    CHECK(std::filesystem::exists(out_dir + "/country_verdicts.csv"));
    CHECK(std::filesystem::exists(out_dir + "/metrics.json"));
    CHECK(std::filesystem::exists(out_dir + "/peace_scatter.svg"));

    const std::string verdicts = oracle::read_file(out_dir + "/country_verdicts.csv");
    CHECK(verdicts.find("Australia,100,76,0.760000,peaceful,peaceful") != std::string::npos);
    CHECK(verdicts.find("Singapore,100,48,0.480000,non-peaceful,peaceful") != std::string::npos);
}

TEST_CASE("remote embedding without the credential variable fails cleanly") {
    oracle::TempDir tmp("pg-cli");
    const std::string articles = tmp.file("articles.jsonl");
    const std::string labels = tmp.file("labels.csv");
    write_file(articles,
               "{\"id\":\"a1\",\"country\":\"Atlantis\",\"text\":\"calm seas tonight\"}\n");
    write_file(labels, "country,peace_label\nAtlantis,peaceful\n");

    EnvGuard guard("PEACEGRID_API_KEY");
    ::unsetenv("PEACEGRID_API_KEY");
    CHECK(run({"embed", "--articles", articles, "--labels", labels, "--store",
               tmp.file("vectors.store"), "--embedder", "remote"}) == 2);
    CHECK(!std::filesystem::exists(tmp.file("vectors.store")));
}

TEST_CASE("config file errors exit with code 2") {
    oracle::TempDir tmp("pg-cli");
    CHECK(run({"--config", "/no/such/config.json", "ingest", "--articles", "a", "--labels",
               "b"}) == 2);

    const std::string bad_json = tmp.file("bad.json");
    write_file(bad_json, "{not json");
    CHECK(run({"--config", bad_json, "ingest", "--articles", "a", "--labels", "b"}) == 2);

    const std::string bad_key = tmp.file("bad_key.json");
    write_file(bad_key, "{\"thresholdd\": 0.5}");
    CHECK(run({"--config", bad_key, "ingest", "--articles", "a", "--labels", "b"}) == 2);

    const std::string bad_nested = tmp.file("bad_nested.json");
    write_file(bad_nested, "{\"rule\": {\"kind\": \"knn_majority\", \"neighbors\": 3}}");
    CHECK(run({"--config", bad_nested, "ingest", "--articles", "a", "--labels", "b"}) == 2);
}

TEST_CASE("config file supplies paths that flags may omit") {
    oracle::TempDir tmp("pg-cli");
    const std::string out_dir = tmp.file("cfg_reports");
    const std::string config = tmp.file("run.json");
    write_file(config, "{\"threshold\": 0.4, \"rule\": {\"kind\": \"knn_majority\", \"k\": 3},\n"
                       " \"paths\": {\"labels\": \"" + fixture("reference_labels.csv") + "\",\n"
                       "            \"out\": \"" + out_dir + "\"}}\n");
    CHECK(run({"--config", config, "evaluate", "--fixture-percentages",
               fixture("reference_percentages.csv")}) == 0);
    CHECK(std::filesystem::exists(out_dir + "/metrics.json"));

    // At threshold 0.4 a 48% peaceful share sits above the bar.
    const std::string verdicts = oracle::read_file(out_dir + "/country_verdicts.csv");
    CHECK(verdicts.find("Singapore,100,48,0.480000,peaceful,peaceful") != std::string::npos);
}

TEST_CASE("synth, evaluate, ablate, and correlate chain end to end") {
    oracle::TempDir tmp("pg-cli");
    const std::string store = tmp.file("synth.store");
    const std::string labels = tmp.file("synth_labels.csv");

    CHECK(run({"synth", "--mode", "texts", "--labels-out", labels}) == 2);

    const std::vector<std::string> synth_args = {
        "synth",        "--mode", "vectors", "--store-out", store, "--labels-out", labels,
        "--countries",  "4",      "--peaceful", "2",        "--per-country", "6",
        "--separability", "5.0",  "--spread", "0.1",        "--noise", "0.3",
        "--dim",        "16",     "--seed", "7"};
    REQUIRE(run(synth_args) == 0);
    REQUIRE(std::filesystem::exists(store));
    REQUIRE(std::filesystem::exists(labels));

    // Same seed, second output path: the store bytes must not depend on when
    // or where they were written.
    std::vector<std::string> rerun_args = synth_args;
    rerun_args[4] = tmp.file("synth_again.store");
    REQUIRE(run(rerun_args) == 0);
    CHECK(oracle::read_file(store) == oracle::read_file(tmp.file("synth_again.store")));

    const std::string eval_dir = tmp.file("eval_reports");
    CHECK(run({"evaluate", "--store", store, "--labels", labels, "--out", eval_dir, "--k",
               "3"}) == 0);
    CHECK(std::filesystem::exists(eval_dir + "/country_verdicts.csv"));
    CHECK(std::filesystem::exists(eval_dir + "/metrics.json"));
    CHECK(std::filesystem::exists(eval_dir + "/peace_scatter.svg"));

    const std::string ablate_dir = tmp.file("ablate_reports");
    CHECK(run({"ablate", "--store", store, "--labels", labels, "--out", ablate_dir, "--k",
               "3"}) == 0);
    CHECK(std::filesystem::exists(ablate_dir + "/ablation.csv"));
    CHECK(std::filesystem::exists(ablate_dir + "/ablation_articles.csv"));
    CHECK(std::filesystem::exists(ablate_dir + "/ablation.svg"));

    CHECK(run({"correlate", "--verdicts", eval_dir + "/country_verdicts.csv", "--index",
               labels}) == 0);
}
