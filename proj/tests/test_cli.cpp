#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "fewsel/corpus.hpp"
#include "fewsel/rng.hpp"
#include "fewsel/tensorset.hpp"
#include "helpers.hpp"

using namespace fewsel;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FEWSEL_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string run_cli_stderr(const std::string& args, const fs::path& dir) {
    const auto errfile = dir / "stderr.txt";
    const std::string cmd =
        std::string(FEWSEL_CLI_PATH) + " " + args + " 2>" + errfile.string();
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) != 0);
    return read_file(errfile.string());
}

// corpus + classification tensors on disk for select/score runs
struct CliFixture {
    fs::path dir;
    std::string corpus_path;
    std::string tensors_path;
};

CliFixture make_fixture(const std::string& tag) {
    CliFixture fx;
    fx.dir = testutil::temp_dir("cli_" + tag);
    SplitMix64 rng(555);

    std::vector<std::vector<std::string>> sents;
    TensorSet ts;
    ts.num_classes = 3;
    ts.max_tokens = 16;
    ts.has_token_dists = true;
    ts.has_hidden = true;
    ts.has_sent_embed = true;
    for (int i = 0; i < 25; ++i) {
        sents.push_back({"tok" + std::to_string(i % 6), "tok" + std::to_string((i * 2) % 9)});
        ts.token_dists.push_back(TokenDists{1, 3, testutil::random_dist(3, rng)});
        std::vector<double> h(4), s(3);
        for (auto& v : h) v = rng.next_double();
        for (auto& v : s) v = rng.next_double() + 0.1;
        ts.hidden.push_back(h);
        ts.sent_embed.push_back(s);
    }
    const Corpus corpus = testutil::corpus_from_tokens(sents);
    fx.corpus_path = (fx.dir / "corpus.jsonl").string();
    fx.tensors_path = (fx.dir / "tensors.bin").string();
    save_corpus(corpus, fx.corpus_path);
    save_tensors(ts, corpus, fx.tensors_path, true);
    return fx;
}

}  // namespace

TEST_CASE("cli: --version exits 0") {
    CHECK(run_cli("--version") == 0);
}

TEST_CASE("cli: select pe writes a selection file and exits 0") {
    const auto fx = make_fixture("pe");
    const auto out = (fx.dir / "sel.json").string();
    const int code = run_cli("select --strategy pe --k 10 --lambda 1 --corpus " +
                             fx.corpus_path + " --tensors " + fx.tensors_path + " --out " + out);
    CHECK(code == 0);
    REQUIRE(fs::exists(out));
    const std::string content = read_file(out);
    CHECK(content.find("\"strategy\": \"pe\"") != std::string::npos);
}

TEST_CASE("cli: strategy-mismatched flags exit 2 with a message, no output file") {
    const auto fx = make_fixture("badgamma");
    const auto out = (fx.dir / "never.json").string();
    const std::string err = run_cli_stderr("select --strategy pe --k 10 --gamma 2 --corpus " +
                                               fx.corpus_path + " --tensors " + fx.tensors_path +
                                               " --out " + out,
                                           fx.dir);
    CHECK(err.find("gamma is a GE parameter") != std::string::npos);
    CHECK(!fs::exists(out));
    const int code = run_cli("select --strategy pe --k 10 --gamma 2 --corpus " +
                             fx.corpus_path + " --tensors " + fx.tensors_path + " --out " + out);
    CHECK(code == 2);
}

TEST_CASE("cli: missing tensors for pe exits 2 before writing anything") {
    const auto fx = make_fixture("notensors");
    const auto out = (fx.dir / "never2.json").string();
    const int code =
        run_cli("select --strategy pe --k 5 --corpus " + fx.corpus_path + " --out " + out);
    CHECK(code == 2);
    CHECK(!fs::exists(out));
}

TEST_CASE("cli: selections are byte-identical across runs, threads and replay") {
    const auto fx = make_fixture("determinism");
    for (const std::string strat : {"rand", "dce", "pe", "ge", "le"}) {
        const auto out1 = (fx.dir / (strat + "_1.json")).string();
        const auto out8 = (fx.dir / (strat + "_8.json")).string();
        const auto outr = (fx.dir / (strat + "_r.json")).string();
        const std::string base = "select --strategy " + strat + " --k 8 --seed 3 --corpus " +
                                 fx.corpus_path + " --tensors " + fx.tensors_path;
        REQUIRE(run_cli("--threads 1 " + base + " --out " + out1) == 0);
        REQUIRE(run_cli("--threads 8 " + base + " --out " + out8) == 0);
        REQUIRE(run_cli("--threads 4 select --replay " + out1 + " --corpus " + fx.corpus_path +
                        " --tensors " + fx.tensors_path + " --out " + outr) == 0);
        CAPTURE(strat);
        CHECK(read_file(out1) == read_file(out8));
        CHECK(read_file(out1) == read_file(outr));
    }
}

TEST_CASE("cli: score dumps pe/ge-norm/le-norm diagnostics deterministically") {
    const auto fx = make_fixture("score");
    const auto out1 = (fx.dir / "pe1.json").string();
    const auto out1b = (fx.dir / "pe1b.json").string();
    const auto out2 = (fx.dir / "ge.json").string();
    const auto out3 = (fx.dir / "le.json").string();
    REQUIRE(run_cli("score --what pe --corpus " + fx.corpus_path + " --tensors " +
                    fx.tensors_path + " --out " + out1) == 0);
    REQUIRE(run_cli("score --what pe --corpus " + fx.corpus_path + " --tensors " +
                    fx.tensors_path + " --out " + out1b) == 0);
    REQUIRE(run_cli("score --what ge-norm --corpus " + fx.corpus_path + " --tensors " +
                    fx.tensors_path + " --out " + out2) == 0);
    REQUIRE(run_cli("score --what le-norm --corpus " + fx.corpus_path + " --tensors " +
                    fx.tensors_path + " --out " + out3) == 0);
    CHECK(read_file(out1) == read_file(out1b));
    CHECK(read_file(out1).find("\"mu\":") != std::string::npos);
    CHECK(read_file(out2).find("\"what\": \"ge-norm\"") != std::string::npos);
    CHECK(read_file(out3).find("\"sigma\":") != std::string::npos);
    CHECK(run_cli("score --what nonsense --corpus " + fx.corpus_path + " --tensors " +
                  fx.tensors_path) == 2);
}

TEST_CASE("cli: FEWSEL_THREADS env var caps workers without changing output") {
    const auto fx = make_fixture("envthreads");
    const auto o1 = (fx.dir / "env1.json").string();
    const auto o2 = (fx.dir / "env2.json").string();
    const std::string base = "select --strategy le --k 6 --seed 4 --corpus " + fx.corpus_path +
                             " --tensors " + fx.tensors_path;
    const std::string cmd1 = "FEWSEL_THREADS=1 " + std::string(FEWSEL_CLI_PATH) + " " + base +
                             " --out " + o1 + " 2>/dev/null";
    const std::string cmd2 = "FEWSEL_THREADS=7 " + std::string(FEWSEL_CLI_PATH) + " " + base +
                             " --out " + o2 + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd1.c_str())) == 0);
    REQUIRE(WEXITSTATUS(std::system(cmd2.c_str())) == 0);
    CHECK(read_file(o1) == read_file(o2));
}

TEST_CASE("cli: simulate with a multi-task suite reports category means") {
    const auto dir = testutil::temp_dir("cli_suite");
    const std::string cfg = R"({"tasks": [
      {"name": "lang_a", "category": "C1",
       "classes": 3, "feature_dim": 2, "noise": 1.0,
       "class_means": [[-3, 0], [3, 0], [0, 1.5]],
       "pivot_per_class": [20, 20, 0], "pool_per_class": [6, 6, 6],
       "test_per_class": [40, 40, 40], "epochs": 80, "learning_rate": 0.5},
      {"name": "lang_b", "category": "C2",
       "classes": 3, "feature_dim": 2, "noise": 1.5,
       "class_means": [[-3, 0], [3, 0], [0, 1.5]],
       "pivot_per_class": [20, 20, 0], "pool_per_class": [6, 6, 6],
       "test_per_class": [40, 40, 40], "epochs": 80, "learning_rate": 0.5}
    ]})";
    const auto cfg_path = (dir / "suite.json").string();
    write_file_atomic(cfg_path, cfg);
    const auto out = (dir / "suite_report.json").string();
    const int code = run_cli("simulate --config " + cfg_path +
                             " --strategies rand,le --ks 4 --seeds 0,1,2 --out " + out);
    CHECK(code == 0);
    const std::string report = read_file(out);
    CHECK(report.find("category_means") != std::string::npos);
    CHECK(report.find("lang_a") != std::string::npos);
    CHECK(report.find("\"C2\"") != std::string::npos);
}

TEST_CASE("cli: simulate runs a small experiment end to end") {
    const auto dir = testutil::temp_dir("cli_sim");
    const std::string cfg = R"({
      "classes": 3, "feature_dim": 2, "noise": 1.0,
      "class_means": [[-3, 0], [3, 0], [0, 1.5]],
      "pivot_per_class": [25, 25, 0],
      "pool_per_class": [8, 8, 8],
      "test_per_class": [60, 60, 60],
      "epochs": 100, "learning_rate": 0.5
    })";
    const auto cfg_path = (dir / "task.json").string();
    write_file_atomic(cfg_path, cfg);
    const auto out = (dir / "report.json").string();
    const int code = run_cli("simulate --config " + cfg_path +
                             " --strategies rand,pe:1,le --ks 5,10 --seeds 0..2 --out " + out);
    CHECK(code == 0);
    REQUIRE(fs::exists(out));
    const std::string report = read_file(out);
    CHECK(report.find("median_delta") != std::string::npos);
    CHECK(report.find("ttest_vs_rand") != std::string::npos);
    CHECK(report.find("\"label_reads_during_selection\": 0") != std::string::npos);
}

TEST_CASE("cli: stats ttest prints t, p and df") {
    const auto dir = testutil::temp_dir("cli_tt");
    const auto outfile = dir / "tt.txt";
    const std::string cmd = std::string(FEWSEL_CLI_PATH) +
                            " stats ttest --a 2,4,6 --b 1,2,3 >" + outfile.string();
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const std::string out = read_file(outfile.string());
    CHECK(out.find("\"t\": 3.464102") != std::string::npos);
    CHECK(out.find("\"df\": 2") != std::string::npos);
    CHECK(out.find("\"p\": 0.074180") != std::string::npos);
}

TEST_CASE("cli: README command forms all run") {
    const auto fx = make_fixture("readme");
    const auto out = [&](const std::string& name) { return (fx.dir / name).string(); };
    CHECK(run_cli("select --strategy pe --k 10 --lambda 1 --corpus " + fx.corpus_path +
                  " --tensors " + fx.tensors_path + " --out " + out("r1.json")) == 0);
    CHECK(run_cli("select --strategy dce --k 4 --dce-g 2 --ngram-order 3 --corpus " +
                  fx.corpus_path + " --out " + out("r2.json")) == 0);
    CHECK(run_cli("select --strategy ge --k 10 --gamma 1 --seed 3 --corpus " + fx.corpus_path +
                  " --tensors " + fx.tensors_path + " --out " + out("r3.json")) == 0);
    CHECK(run_cli("select --replay " + out("r1.json") + " --corpus " + fx.corpus_path +
                  " --tensors " + fx.tensors_path + " --out " + out("r4.json")) == 0);
    CHECK(read_file(out("r1.json")) == read_file(out("r4.json")));
    // gamma expansion recorded in params
    CHECK(read_file(out("r3.json")).find("\"gamma\": 1") != std::string::npos);
}

TEST_CASE("cli: unknown strategy and malformed corpus exit 2") {
    const auto fx = make_fixture("bad");
    CHECK(run_cli("select --strategy nope --k 3 --corpus " + fx.corpus_path) == 2);
    const auto bad_corpus = (fx.dir / "bad.jsonl").string();
    write_file_atomic(bad_corpus, "this is not json\n");
    CHECK(run_cli("select --strategy rand --k 3 --corpus " + bad_corpus) == 2);
}
