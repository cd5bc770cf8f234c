#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dimabsa/inference.hpp"
#include "dimabsa/util.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

using namespace dimabsa;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(DIMABSA_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buffer{};
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buffer.data(), buffer.size(), pipe)) result.output += buffer.data();
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

const fs::path kFixtures = DIMABSA_FIXTURE_DIR;

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "dimabsa_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

} // namespace

TEST_CASE("ingest summarizes a valid file and exits 0") {
    RunResult r = run_cli("ingest --input " + q(kFixtures / "train_50.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("50 samples, 58 quadruples") != std::string::npos);
    CHECK(r.output.find("0 errors") != std::string::npos);
}

TEST_CASE("ingest rejects a bad category with exit 1 and record context") {
    fs::path bad = work_dir() / "bad.json";
    atomic_write_file(bad,
                      R"([{"id":"S1","text":"x","labels":[["a","食物#口感","好","6.00#6.00"]]}])");
    RunResult r = run_cli("ingest --input " + q(bad));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("unknown category at record 0") != std::string::npos);
}

TEST_CASE("ingest accepts an empty record list") {
    fs::path empty = work_dir() / "empty.json";
    atomic_write_file(empty, "[]");
    RunResult r = run_cli("ingest --input " + q(empty));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("0 samples, 0 quadruples") != std::string::npos);
}

TEST_CASE("stats and lexicon emit config-stamped artifacts") {
    fs::path stats_out = work_dir() / "stats.tsv";
    RunResult r = run_cli("stats --input " + q(kFixtures / "train_50.json") + " --out " + q(stats_out));
    CHECK(r.exit_code == 0);
    std::string stats = read_text_file(stats_out);
    CHECK(stats.find("# config_hash\t") == 0);
    CHECK(stats.find("# pairs") != std::string::npos);

    fs::path lex_out = work_dir() / "lexicon.json";
    RunResult r2 = run_cli("lexicon --input " + q(kFixtures / "train_50.json") + " --out " + q(lex_out));
    CHECK(r2.exit_code == 0);
    auto doc = nlohmann::json::parse(read_text_file(lex_out));
    CHECK(doc.contains("config_hash"));
    std::size_t total = 0;
    for (const auto& e : doc.at("entries")) total += e.at("count").get<std::size_t>();
    CHECK(total == 58);
}

TEST_CASE("export-sft writes one record per training sample") {
    fs::path out = work_dir() / "sft.jsonl";
    RunResult r = run_cli("export-sft --train " + q(kFixtures / "train_50.json") + " --out " + q(out) +
                          " --seed 7");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("50 instruction records") != std::string::npos);
    std::string body = read_text_file(out);
    CHECK(count_occurrences(body, "\n") == 50);
    CHECK(body.find("7.50#7.25") != std::string::npos);
}

TEST_CASE("offline two-stage pipeline, evaluation, and determinism") {
    fs::path dir = work_dir();
    fs::path cache = dir / "cache";
    std::string common = " --test " + q(kFixtures / "pipeline_test.json") + " --mock-chat " +
                         q(kFixtures / "mock_chat.json") + " --cache-dir " + q(cache) + " --seed 3";

    fs::path s1a = dir / "s1a.jsonl";
    RunResult r1 = run_cli("stage1" + common + " --out " + q(s1a));
    CHECK(r1.exit_code == 0);
    REQUIRE(fs::exists(s1a));
    REQUIRE(fs::exists(s1a.string() + ".manifest.json"));

    std::string stage2_common = common + " --train " + q(kFixtures / "pipeline_gold.json") +
                                " --mock-encoder --encoder-dim 24 --k 3";
    fs::path s2a = dir / "s2a.jsonl";
    RunResult r2 = run_cli("stage2" + stage2_common + " --stage1 " + q(s1a) + " --out " + q(s2a));
    CHECK(r2.exit_code == 0);
    REQUIRE(fs::exists(s2a));

    // the fine predictions parse and cover every sample
    PredictionFile fine = read_predictions(s2a);
    CHECK(fine.predictions.size() == 10);
    for (const auto& p : fine.predictions) CHECK(p.stage == Stage::fine);

    fs::path report = dir / "report.json";
    RunResult r3 = run_cli("evaluate --pred " + q(s2a) + " --gold " + q(kFixtures / "pipeline_gold.json") +
                           " --out " + q(report));
    CHECK(r3.exit_code == 0);
    CHECK(r3.output.find("quadruple") != std::string::npos);
    REQUIRE(fs::exists(report));

    RunResult r4 = run_cli("report --input " + q(report));
    CHECK(r4.exit_code == 0);
    CHECK(r4.output.find("triplet") != std::string::npos);

    SUBCASE("identical rerun is byte-identical and endpoint-free") {
        fs::path s1b = dir / "s1b.jsonl";
        fs::path s2b = dir / "s2b.jsonl";
        CHECK(run_cli("stage1" + common + " --out " + q(s1b)).exit_code == 0);
        CHECK(run_cli("stage2" + stage2_common + " --stage1 " + q(s1b) + " --out " + q(s2b)).exit_code ==
              0);
        CHECK(read_text_file(s1a) == read_text_file(s1b));
        CHECK(read_text_file(s2a) == read_text_file(s2b));
        RunManifest m1 = read_manifest(s1b.string() + ".manifest.json");
        RunManifest m2 = read_manifest(s2b.string() + ".manifest.json");
        CHECK(m1.endpoint_calls == 0);
        CHECK(m2.endpoint_calls == 0);
    }
}

TEST_CASE("evaluate on gold replayed as predictions is all ones") {
    RunResult r = run_cli("evaluate --pred " + q(kFixtures / "pipeline_gold.json") + " --gold " +
                          q(kFixtures / "pipeline_gold.json"));
    CHECK(r.exit_code == 0);
    CHECK(count_occurrences(r.output, "1.000") == 18);
}

TEST_CASE("stage2 without stage1 output names the missing step") {
    RunResult r = run_cli("stage2 --test " + q(kFixtures / "pipeline_test.json") + " --train " +
                          q(kFixtures / "pipeline_gold.json") + " --stage1 " +
                          q(work_dir() / "missing.jsonl") + " --out " + q(work_dir() / "x.jsonl") +
                          " --mock-chat " + q(kFixtures / "mock_chat.json") + " --mock-encoder");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("run `dimabsa stage1` first") != std::string::npos);
}

TEST_CASE("evaluate without predictions names the missing step") {
    RunResult r = run_cli("evaluate --pred " + q(work_dir() / "nope.jsonl") + " --gold " +
                          q(kFixtures / "pipeline_gold.json"));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("first") != std::string::npos);
}

TEST_CASE("numeric ranges are validated with exit 1") {
    RunResult r = run_cli("stage1 --test " + q(kFixtures / "pipeline_test.json") + " --out " +
                          q(work_dir() / "y.jsonl") + " --mock-chat " + q(kFixtures / "mock_chat.json") +
                          " --k 9");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("k must be in [3, 5]") != std::string::npos);

    RunResult r2 = run_cli("stage1 --test " + q(kFixtures / "pipeline_test.json") + " --out " +
                           q(work_dir() / "y.jsonl") + " --mock-chat " + q(kFixtures / "mock_chat.json") +
                           " --example-count 9");
    CHECK(r2.exit_code == 1);

    RunResult r3 = run_cli("evaluate --pred " + q(kFixtures / "pipeline_gold.json") + " --gold " +
                           q(kFixtures / "pipeline_gold.json") + " --rounding sideways");
    CHECK(r3.exit_code == 1);
    CHECK(r3.output.find("rounding") != std::string::npos);
}

TEST_CASE("endpoint failure surfaces as exit code 2") {
    // unroutable chat endpoint; per-sample failures keep the run alive but
    // the command reports a runtime failure
    fs::path one = work_dir() / "one.json";
    atomic_write_file(one, R"([{"id":"T1","text":"好吃。"}])");
    RunResult r = run_cli("stage1 --test " + q(one) + " --out " + q(work_dir() / "z.jsonl") +
                          " --chat-url http://127.0.0.1:1/v1/chat/completions --cache-dir " +
                          q(work_dir() / "cache2"));
    CHECK(r.exit_code == 2);
}

TEST_CASE("config file seeds flags and flags still win") {
    fs::path cfg = work_dir() / "run.json";
    nlohmann::json doc = {{"mode", "quadruple"},
                          {"k", 4},
                          {"seed", 11},
                          {"test_path", (kFixtures / "pipeline_test.json").string()},
                          {"cache_dir", (work_dir() / "cache3").string()},
                          {"mock_chat_fixture", (kFixtures / "mock_chat.json").string()}};
    atomic_write_file(cfg, doc.dump());

    fs::path out = work_dir() / "cfg_run.jsonl";
    RunResult r = run_cli("--config " + q(cfg) + " stage1 --out " + q(out));
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out));

    RunResult r2 = run_cli("--config " + q(cfg) + " stage1 --out " + q(out) + " --k 99");
    CHECK(r2.exit_code == 1); // flag overrides config and fails validation
}
