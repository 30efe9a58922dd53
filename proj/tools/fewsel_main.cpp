// fewsel - data selection for few-shot cross-lingual transfer.
//
// Subcommands:
//   select    pick k examples from a corpus with one of rand/dce/pe/ge/le
//   score     dump per-example diagnostics (pe, ge-norm, le-norm)
//   simulate  synthetic end-to-end few-shot experiment with a toy classifier
//   stats     statistics helpers (paired t-test)
//
// Exit codes: 0 success, 2 validation error, 1 internal error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fewsel/corpus.hpp"
#include "fewsel/embeddings.hpp"
#include "fewsel/error.hpp"
#include "fewsel/harness.hpp"
#include "fewsel/selection.hpp"
#include "fewsel/stats.hpp"
#include "fewsel/strategies.hpp"
#include "fewsel/tensorset.hpp"
#include "fewsel/threads.hpp"
#include "fewsel/uncertainty.hpp"

namespace {

constexpr const char* kVersion = "fewsel 1.0.0";

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    // "0..19" or "0,1,5"
    std::vector<std::uint64_t> seeds;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t lo = std::stoull(text.substr(0, dots));
        const std::uint64_t hi = std::stoull(text.substr(dots + 2));
        if (hi < lo) throw fewsel::ValidationError("bad seed range '" + text + "'");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw fewsel::ValidationError("no seeds in '" + text + "'");
    return seeds;
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) ks.push_back(std::stoull(item));
    }
    if (ks.empty()) throw fewsel::ValidationError("no k values in '" + text + "'");
    return ks;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data selection strategies for few-shot cross-lingual transfer"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    int threads = 0;  // 0 = FEWSEL_THREADS or hardware default
    app.add_option("--threads", threads, "Worker thread cap (default: FEWSEL_THREADS or all cores)");
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Progress notes on stderr");

    // ---- select ----
    auto* sel_cmd = app.add_subcommand("select", "Select k examples for annotation");
    std::string sel_strategy, sel_corpus_path, sel_tensors_path, sel_out = "selection.json";
    std::string sel_dce_sign = "prose", sel_kpp_first = "norm", sel_replay;
    std::size_t sel_k = 10, sel_g = 10;
    double sel_lambda = 0.0;
    int sel_gamma = 0, sel_order = 3;
    std::uint64_t sel_seed = 0;
    bool sel_dedupe = false, sel_no_bias = false;
    sel_cmd->add_option("--strategy", sel_strategy, "rand | dce | pe | ge | le");
    sel_cmd->add_option("--corpus", sel_corpus_path, "Corpus file (JSON lines)")->required();
    sel_cmd->add_option("--tensors", sel_tensors_path, "Tensor file (pe/ge/le)");
    sel_cmd->add_option("--k", sel_k, "Budget; the studied grid is {10, 50, 100, 500, 1000}");
    auto* opt_lambda = sel_cmd->add_option(
        "--lambda", sel_lambda,
        "pe: zone offset (default 1); ge/le: enables the norm filter. Grid {0, 0.5, 1}");
    auto* opt_gamma = sel_cmd->add_option(
        "--gamma", sel_gamma, "ge only: neighbors added per center. Grid {0, 1, 2, 3}");
    auto* opt_g = sel_cmd->add_option("--dce-g", sel_g, "dce: batch size per iteration (default 10)");
    sel_cmd->add_option("--ngram-order", sel_order, "dce: n-gram order (default 3)");
    sel_cmd->add_option("--dce-sign", sel_dce_sign, "dce ranking direction: prose (default) | eq3");
    sel_cmd->add_option("--kpp-first", sel_kpp_first,
                        "k-means++ first draw: norm (default) | uniform");
    sel_cmd->add_flag("--ge-no-bias", sel_no_bias, "Drop the bias block from gradient embeddings");
    sel_cmd->add_option("--seed", sel_seed, "Seed for all randomness (default 0)");
    sel_cmd->add_flag("--dedupe", sel_dedupe, "Drop later duplicate token sequences at load");
    sel_cmd->add_option("--out", sel_out, "Output selection file");
    sel_cmd->add_option("--replay", sel_replay, "Re-run the spec recorded in a selection file");

    // ---- score ----
    auto* score_cmd = app.add_subcommand("score", "Dump per-example diagnostic scores");
    std::string score_what, score_corpus_path, score_tensors_path, score_out;
    double score_lambda = 0.0;
    bool score_no_bias = false, score_dedupe = false;
    score_cmd->add_option("--what", score_what, "pe | ge-norm | le-norm")->required();
    score_cmd->add_option("--corpus", score_corpus_path, "Corpus file")->required();
    score_cmd->add_option("--tensors", score_tensors_path, "Tensor file")->required();
    score_cmd->add_option("--lambda", score_lambda, "Reported alongside mu and sigma");
    score_cmd->add_flag("--ge-no-bias", score_no_bias, "Drop the bias block from gradient embeddings");
    score_cmd->add_flag("--dedupe", score_dedupe, "Drop later duplicate token sequences at load");
    score_cmd->add_option("--out", score_out, "Output file (default: stdout)");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "Synthetic few-shot experiment");
    std::string sim_config, sim_strategies = "rand,pe,le", sim_ks = "10,50,100", sim_seeds = "0..2";
    std::string sim_out = "report.json";
    std::uint64_t sim_task_seed = 7;
    int sim_baselines = 3;
    bool sim_fine_tune = false;
    sim_cmd->add_option("--config", sim_config, "Task config JSON")->required();
    sim_cmd->add_option("--strategies", sim_strategies,
                        "Comma list; entries like rand, dce, pe:1, ge:g1, le:0.5");
    sim_cmd->add_option("--ks", sim_ks, "Comma list of budgets, e.g. 10,50,100");
    sim_cmd->add_option("--seeds", sim_seeds, "Seed list 0,1,2 or range 0..19");
    sim_cmd->add_option("--task-seed", sim_task_seed, "Seed for data generation");
    sim_cmd->add_option("--rand-baselines", sim_baselines,
                        "RAND draws averaged per seed (default 3)");
    sim_cmd->add_flag("--fine-tune-further", sim_fine_tune,
                      "Continue from zero-shot weights instead of retraining from scratch");
    sim_cmd->add_option("--out", sim_out, "Output report file");

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "Statistics helpers");
    auto* ttest_cmd = stats_cmd->add_subcommand("ttest", "Paired two-sided Student's t-test");
    std::string tt_a, tt_b;
    ttest_cmd->add_option("--a", tt_a, "Comma list of per-seed values")->required();
    ttest_cmd->add_option("--b", tt_b, "Comma list of per-seed values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const int nthreads = fewsel::effective_threads(threads);

        if (*sel_cmd) {
            fewsel::StrategySpec spec;
            if (!sel_replay.empty()) {
                spec = fewsel::spec_from_selection(fewsel::load_selection(sel_replay));
            } else {
                if (sel_strategy.empty())
                    throw fewsel::ValidationError("--strategy is required (or use --replay)");
                spec.name = fewsel::strategy_from_string(sel_strategy);
                spec.k = sel_k;
                spec.seed = sel_seed;
                spec.ngram_order = sel_order;
                if (*opt_g) spec.g = sel_g;
                if (*opt_gamma) spec.gamma = sel_gamma;
                if (*opt_lambda) {
                    spec.lambda = sel_lambda;
                    if (spec.name == fewsel::Strategy::kGe || spec.name == fewsel::Strategy::kLe)
                        spec.filter_enabled = true;
                }
                if (sel_dce_sign == "eq3") spec.dce_sign = fewsel::DceSign::kEq3;
                else if (sel_dce_sign != "prose")
                    throw fewsel::ValidationError("--dce-sign must be prose or eq3");
                if (sel_kpp_first == "uniform") spec.kpp_first = fewsel::KppFirst::kUniform;
                else if (sel_kpp_first != "norm")
                    throw fewsel::ValidationError("--kpp-first must be norm or uniform");
                spec.ge_bias = !sel_no_bias;
            }
            std::vector<std::string> warnings;
            fewsel::validate_spec(spec, &warnings);  // flag errors before reading any file

            const fewsel::Corpus corpus = fewsel::load_corpus(sel_corpus_path, sel_dedupe);
            if (sel_dedupe && corpus.duplicates_removed() > 0)
                std::cerr << "removed " << corpus.duplicates_removed()
                          << " duplicate examples\n";
            if (verbose)
                std::cerr << "corpus: " << corpus.size() << " examples, vocab "
                          << corpus.vocab().size() << "\n";

            std::optional<fewsel::TensorSet> tensors;
            if (!sel_tensors_path.empty())
                tensors = fewsel::load_tensors(sel_tensors_path, corpus);

            const fewsel::Selection selection = fewsel::select(
                spec, corpus, tensors ? &*tensors : nullptr, nthreads, &warnings);
            print_warnings(warnings);
            fewsel::write_selection(selection, sel_out);
            if (verbose)
                std::cerr << "selected " << selection.ids.size() << " ids -> " << sel_out
                          << "\n";
            return 0;
        }

        if (*score_cmd) {
            const fewsel::Corpus corpus = fewsel::load_corpus(score_corpus_path, score_dedupe);
            const fewsel::TensorSet tensors = fewsel::load_tensors(score_tensors_path, corpus);

            std::vector<double> values;
            double mu = 0.0, sigma = 0.0;
            if (score_what == "pe") {
                const auto stats = fewsel::compute_pe_stats(tensors, score_lambda, nthreads);
                values = stats.pe;
                mu = stats.mu;
                sigma = stats.sigma;
            } else if (score_what == "ge-norm" || score_what == "le-norm") {
                if (score_what == "ge-norm") {
                    const auto embeds =
                        fewsel::gradient_embeddings(tensors, !score_no_bias, nthreads);
                    for (const auto& e : embeds) values.push_back(e.norm);
                } else {
                    const auto embeds = fewsel::loss_embeddings(tensors, nthreads);
                    for (const auto& e : embeds) values.push_back(e.norm);
                }
                const auto stats = fewsel::compute_norm_stats(values, score_lambda);
                mu = stats.mu;
                sigma = stats.sigma;
            } else {
                throw fewsel::ValidationError("--what must be pe, ge-norm or le-norm");
            }

            std::string out = "{\"ids\": [";
            for (std::size_t i = 0; i < corpus.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(corpus.examples()[i].id);
            }
            out += "], \"lambda\": " + fmt6(score_lambda) + ", \"mu\": " + fmt6(mu) +
                   ", \"sigma\": " + fmt6(sigma) + ", \"values\": [";
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i) out += ", ";
                out += fmt6(values[i]);
            }
            out += "], \"what\": \"" + score_what + "\"}\n";
            if (score_out.empty())
                std::cout << out;
            else
                fewsel::write_file_atomic(score_out, out);
            return 0;
        }

        if (*sim_cmd) {
            const std::vector<fewsel::NamedTask> tasks =
                fewsel::suite_from_json(fewsel::read_file(sim_config));

            std::vector<fewsel::StrategySpec> specs;
            std::stringstream ss(sim_strategies);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (item.empty()) continue;
                fewsel::StrategySpec spec;
                const auto colon = item.find(':');
                const std::string name = item.substr(0, colon);
                spec.name = fewsel::strategy_from_string(name);
                spec.k = 1;  // grid supplies the real budgets
                if (colon != std::string::npos) {
                    const std::string arg = item.substr(colon + 1);
                    if (!arg.empty() && arg[0] == 'g') {
                        spec.gamma = std::stoi(arg.substr(1));
                    } else {
                        spec.lambda = std::stod(arg);
                        if (spec.name == fewsel::Strategy::kGe ||
                            spec.name == fewsel::Strategy::kLe)
                            spec.filter_enabled = true;
                    }
                }
                specs.push_back(spec);
            }
            if (specs.empty()) throw fewsel::ValidationError("no strategies given");

            fewsel::FewshotOptions opts;
            opts.ks = parse_k_list(sim_ks);
            opts.seeds = parse_seed_list(sim_seeds);
            opts.rand_baselines = sim_baselines;
            opts.threads = nthreads;
            opts.fine_tune_further = sim_fine_tune;

            if (verbose)
                std::cerr << "simulate: " << tasks.size() << " task(s), " << specs.size()
                          << " strategies, " << opts.ks.size() << " budgets, "
                          << opts.seeds.size() << " seeds\n";
            if (tasks.size() == 1) {
                const fewsel::SyntheticTask task =
                    fewsel::gen_synthetic(tasks[0].cfg, sim_task_seed);
                const fewsel::DeltaReport report = fewsel::run_fewshot(task, specs, opts);
                print_warnings(report.warnings);
                fewsel::write_file_atomic(sim_out, fewsel::report_to_json(report));
            } else {
                const fewsel::SuiteReport report =
                    fewsel::run_suite(tasks, specs, opts, sim_task_seed);
                for (const auto& [name, rep] : report.per_task) print_warnings(rep.warnings);
                fewsel::write_file_atomic(sim_out, fewsel::suite_report_to_json(report));
            }
            return 0;
        }

        if (*stats_cmd) {
            if (*ttest_cmd) {
                std::vector<double> a, b;
                std::stringstream sa(tt_a), sb(tt_b);
                std::string item;
                while (std::getline(sa, item, ','))
                    if (!item.empty()) a.push_back(std::stod(item));
                while (std::getline(sb, item, ','))
                    if (!item.empty()) b.push_back(std::stod(item));
                const fewsel::TTestResult res = fewsel::paired_ttest(a, b);
                std::cout << "{\"df\": " << res.df << ", \"p\": " << fmt6(res.p)
                          << ", \"t\": " << fmt6(res.t) << "}\n";
                return 0;
            }
            throw fewsel::ValidationError("stats requires a subcommand (ttest)");
        }
    } catch (const fewsel::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
