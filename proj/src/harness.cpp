#include "fewsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "fewsel/error.hpp"
#include "fewsel/rng.hpp"
#include "fewsel/threads.hpp"

namespace fewsel {

using nlohmann::json;

LabelKey harness_label_key() { return LabelKey{}; }

namespace {

// seed streams used below
constexpr std::uint64_t kStreamTrain = 1;
constexpr std::uint64_t kStreamSelect = 2;
constexpr std::uint64_t kStreamRandBase = 16;

std::vector<std::vector<double>> default_means(int classes, int dim, double radius) {
    std::vector<std::vector<double>> means(static_cast<std::size_t>(classes),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (int c = 0; c < classes; ++c) {
        const double angle = 6.283185307179586 * static_cast<double>(c) / classes;
        means[static_cast<std::size_t>(c)][0] = radius * std::cos(angle);
        if (dim > 1) means[static_cast<std::size_t>(c)][1] = radius * std::sin(angle);
    }
    return means;
}

void shuffle_set(LabeledSet& set, SplitMix64& rng) {
    for (std::size_t i = set.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(set.x[i - 1], set.x[j]);
        std::swap(set.y[i - 1], set.y[j]);
    }
}

LabeledSet draw_set(const std::vector<std::vector<double>>& means,
                    const std::vector<std::size_t>& per_class, double noise, int dim,
                    SplitMix64& rng) {
    LabeledSet set;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        for (std::size_t i = 0; i < per_class[c]; ++i) {
            std::vector<double> x(static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d)
                x[static_cast<std::size_t>(d)] =
                    means[c][static_cast<std::size_t>(d)] + noise * rng.next_gaussian();
            set.x.push_back(std::move(x));
            set.y.push_back(static_cast<int>(c));
        }
    }
    shuffle_set(set, rng);
    return set;
}

}  // namespace

SyntheticTask gen_synthetic(const TaskConfig& cfg, std::uint64_t seed) {
    if (cfg.classes < 2) throw ValidationError("need at least 2 classes");
    if (cfg.feature_dim < 1) throw ValidationError("feature_dim must be >= 1");
    const std::size_t C = static_cast<std::size_t>(cfg.classes);
    if (cfg.pivot_per_class.size() != C || cfg.pool_per_class.size() != C ||
        cfg.test_per_class.size() != C)
        throw ValidationError("per-class sizes must list every class");
    if (cfg.zero_shot_band) {
        const auto& band = *cfg.zero_shot_band;
        if (!(band[0] >= 0.0 && band[0] < band[1] && band[1] <= 1.0))
            throw ValidationError("infeasible config: zero-shot band unreachable");
    }
    if (!(cfg.noise > 0.0)) throw ValidationError("noise must be positive");

    SyntheticTask task;
    task.cfg = cfg;
    if (task.cfg.class_means.empty())
        task.cfg.class_means = default_means(cfg.classes, cfg.feature_dim, cfg.mean_radius);
    if (task.cfg.class_means.size() != C)
        throw ValidationError("class_means must list every class");
    for (const auto& m : task.cfg.class_means)
        if (m.size() != static_cast<std::size_t>(cfg.feature_dim))
            throw ValidationError("class mean dimension mismatch");

    std::vector<std::vector<double>> target_means = task.cfg.class_means;
    if (!cfg.target_shift.empty()) {
        if (cfg.target_shift.size() != static_cast<std::size_t>(cfg.feature_dim))
            throw ValidationError("target_shift dimension mismatch");
        for (auto& m : target_means)
            for (std::size_t d = 0; d < m.size(); ++d) m[d] += cfg.target_shift[d];
    }

    SplitMix64 rng(seed);
    task.pivot_train =
        draw_set(task.cfg.class_means, cfg.pivot_per_class, cfg.noise, cfg.feature_dim, rng);
    task.target_pool = draw_set(target_means, cfg.pool_per_class, cfg.noise, cfg.feature_dim, rng);
    task.target_test = draw_set(target_means, cfg.test_per_class, cfg.noise, cfg.feature_dim, rng);
    if (task.pivot_train.size() == 0 || task.target_pool.size() == 0 ||
        task.target_test.size() == 0)
        throw ValidationError("pivot, pool and test must be non-empty");
    return task;
}

std::vector<double> ToyModel::predict(const std::vector<double>& features) const {
    if (features.size() != feature_dim) throw ValidationError("feature dimension mismatch");
    std::vector<double> logits(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        const double* row = weights.data() + c * (feature_dim + 1);
        double z = row[feature_dim];  // bias
        for (std::size_t d = 0; d < feature_dim; ++d) z += row[d] * features[d];
        logits[c] = z;
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - zmax);
        denom += z;
    }
    for (auto& z : logits) z /= denom;
    return logits;
}

std::size_t ToyModel::predict_class(const std::vector<double>& features) const {
    const auto p = predict(features);
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.size(); ++c)
        if (p[c] > p[best]) best = c;
    return best;
}

namespace {

ToyModel train_softmax_init(const LabeledSet& data, std::size_t classes,
                            const TrainHyper& hyper, const std::vector<double>* init_weights) {
    if (data.size() == 0) throw ValidationError("cannot train on an empty set");
    const std::size_t n = data.size();
    const std::size_t dim = data.x[0].size();
    for (const auto& x : data.x)
        if (x.size() != dim) throw ValidationError("inconsistent feature dimensions");
    for (const int y : data.y)
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw ValidationError("label outside class range");

    ToyModel model;
    model.classes = classes;
    model.feature_dim = dim;
    model.weights.assign(classes * (dim + 1), 0.0);
    if (init_weights) {
        if (init_weights->size() != model.weights.size())
            throw ValidationError("initial weights have the wrong shape");
        model.weights = *init_weights;
    } else if (hyper.init_scale > 0.0) {
        SplitMix64 rng(hyper.seed);
        for (auto& w : model.weights) w = hyper.init_scale * rng.next_gaussian();
    }

    std::vector<double> grad(model.weights.size());
    std::vector<double> probs;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            probs = model.predict(data.x[i]);
            const std::size_t y = static_cast<std::size_t>(data.y[i]);
            loss -= std::log(std::max(probs[y], 1e-300));
            for (std::size_t c = 0; c < classes; ++c) {
                const double delta = probs[c] - (c == y ? 1.0 : 0.0);
                double* grow = grad.data() + c * (dim + 1);
                for (std::size_t d = 0; d < dim; ++d) grow[d] += delta * data.x[i][d];
                grow[dim] += delta;
            }
        }
        loss /= static_cast<double>(n);
        if (!std::isfinite(loss)) throw Error("training diverged: non-finite loss");
        model.loss_history.push_back(loss);
        const double scale = hyper.learning_rate / static_cast<double>(n);
        for (std::size_t j = 0; j < grad.size(); ++j) model.weights[j] -= scale * grad[j];
    }
    for (const double w : model.weights)
        if (!std::isfinite(w)) throw Error("training diverged: non-finite weights");
    return model;
}

}  // namespace

ToyModel train_softmax(const LabeledSet& data, std::size_t classes, const TrainHyper& hyper) {
    return train_softmax_init(data, classes, hyper, nullptr);
}

double evaluate_accuracy(const ToyModel& model, const LabeledSet& data) {
    if (data.size() == 0) throw ValidationError("cannot evaluate on an empty set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (model.predict_class(data.x[i]) == static_cast<std::size_t>(data.y[i])) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<double> per_class_accuracy(const ToyModel& model, const LabeledSet& data) {
    std::vector<std::size_t> correct(model.classes, 0), total(model.classes, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto y = static_cast<std::size_t>(data.y[i]);
        ++total[y];
        if (model.predict_class(data.x[i]) == y) ++correct[y];
    }
    std::vector<double> acc(model.classes, 0.0);
    for (std::size_t c = 0; c < model.classes; ++c)
        if (total[c] > 0) acc[c] = static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    return acc;
}

TensorSet model_outputs(const ToyModel& model, const std::vector<std::vector<double>>& data) {
    TensorSet ts;
    ts.num_classes = static_cast<std::uint32_t>(model.classes);
    ts.max_tokens = 128;
    ts.has_token_dists = true;
    ts.has_hidden = true;
    ts.has_sent_embed = true;
    for (const auto& x : data) {
        TokenDists d;
        d.rows = 1;
        d.cols = model.classes;
        d.p = model.predict(x);
        ts.token_dists.push_back(std::move(d));
        std::vector<double> hidden = x;  // bias-augmented input to the head
        hidden.push_back(1.0);
        ts.hidden.push_back(std::move(hidden));
        ts.sent_embed.push_back(x);
    }
    return ts;
}

Corpus pool_corpus(const SyntheticTask& task) {
    std::vector<CorpusRecord> records;
    const double bucket = task.cfg.token_bucket > 0.0 ? task.cfg.token_bucket : 1.0;
    for (std::size_t i = 0; i < task.target_pool.size(); ++i) {
        CorpusRecord rec;
        rec.id = i;
        const auto& x = task.target_pool.x[i];
        for (std::size_t d = 0; d < x.size(); ++d) {
            const long long q = std::llround(x[d] / bucket);
            rec.tokens.push_back("f" + std::to_string(d) + ":" + std::to_string(q));
        }
        rec.label = task.target_pool.y[i];
        records.push_back(std::move(rec));
    }
    return Corpus::from_records(std::move(records), /*dedupe=*/false);
}

namespace {

LabeledSet fewshot_training_set(const SyntheticTask& task, std::vector<std::size_t> selected) {
    // canonical order: pivot first, then selected pool ids ascending, so the
    // training bytes depend only on the selected SET
    std::sort(selected.begin(), selected.end());
    LabeledSet set = task.pivot_train;
    for (const auto id : selected) {
        set.x.push_back(task.target_pool.x[id]);
        set.y.push_back(task.target_pool.y[id]);
    }
    return set;
}

}  // namespace

DeltaReport run_fewshot(const SyntheticTask& task, const std::vector<StrategySpec>& specs,
                        const FewshotOptions& opts) {
    if (opts.seeds.empty()) throw ValidationError("need at least one seed");
    if (opts.ks.empty()) throw ValidationError("need at least one k");
    if (opts.rand_baselines < 1) throw ValidationError("rand_baselines must be >= 1");
    const std::size_t pool_n = task.target_pool.size();
    for (const auto k : opts.ks)
        if (k > pool_n) throw ValidationError("k exceeds pool size");
    for (const auto& spec : specs) validate_spec(spec);

    const std::size_t classes = static_cast<std::size_t>(task.cfg.classes);
    const LabelKey key = harness_label_key();

    DeltaReport report;
    std::vector<std::vector<RunRecord>> per_seed(opts.seeds.size());
    std::vector<std::vector<std::string>> per_seed_warnings(opts.seeds.size());
    std::atomic<std::uint64_t> audit_reads{0};

    parallel_for(opts.seeds.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t si = begin; si < end; ++si) {
            const std::uint64_t seed = opts.seeds[si];
            TrainHyper hyper = task.cfg.hyper;
            hyper.seed = derive_seed(seed, kStreamTrain);

            const ToyModel zero_model = train_softmax(task.pivot_train, classes, hyper);
            const double zero_acc = evaluate_accuracy(zero_model, task.target_test);
            if (task.cfg.zero_shot_band) {
                const auto& band = *task.cfg.zero_shot_band;
                if (zero_acc < band[0] || zero_acc > band[1]) {
                    char buf[128];
                    std::snprintf(buf, sizeof(buf),
                                  "seed %llu: zero-shot accuracy %.4f outside band [%.2f, %.2f]",
                                  static_cast<unsigned long long>(seed), zero_acc, band[0],
                                  band[1]);
                    per_seed_warnings[si].push_back(buf);
                }
            }

            const Corpus corpus = pool_corpus(task);
            const TensorSet tensors = model_outputs(zero_model, task.target_pool.x);

            const auto retrain = [&](const std::vector<std::size_t>& selected) {
                const LabeledSet train_set = fewshot_training_set(task, selected);
                const ToyModel model =
                    opts.fine_tune_further
                        ? train_softmax_init(train_set, classes, hyper, &zero_model.weights)
                        : train_softmax(train_set, classes, hyper);
                return evaluate_accuracy(model, task.target_test);
            };

            for (const auto& spec : specs) {
                for (const auto k : opts.ks) {
                    RunRecord rec;
                    rec.strategy = spec.label();
                    rec.k = k;
                    rec.seed = seed;
                    rec.zero_shot = zero_acc;

                    if (k == 0) {
                        rec.few_shot = retrain({});
                    } else if (spec.name == Strategy::kRand) {
                        // averaged RAND baselines
                        double acc_sum = 0.0;
                        for (int b = 0; b < opts.rand_baselines; ++b) {
                            StrategySpec draw = spec;
                            draw.k = k;
                            draw.seed = derive_seed(seed, kStreamRandBase + static_cast<std::uint64_t>(b));
                            const std::uint64_t before = corpus.label_reads();
                            const Selection sel = select(draw, corpus, &tensors, 1);
                            audit_reads += corpus.label_reads() - before;
                            std::vector<std::size_t> ids(sel.ids.begin(), sel.ids.end());
                            acc_sum += retrain(ids);
                        }
                        rec.few_shot = acc_sum / static_cast<double>(opts.rand_baselines);
                    } else {
                        StrategySpec run_spec = spec;
                        run_spec.k = k;
                        run_spec.seed = derive_seed(seed, kStreamSelect);
                        const std::uint64_t before = corpus.label_reads();
                        const Selection sel = select(run_spec, corpus, &tensors, 1);
                        audit_reads += corpus.label_reads() - before;
                        // reveal labels of the selected ids only (gated read)
                        std::vector<std::size_t> ids;
                        for (const auto id : sel.ids) {
                            (void)corpus.label(id, key);
                            ids.push_back(id);
                        }
                        rec.few_shot = retrain(ids);
                    }
                    rec.delta = rec.few_shot - rec.zero_shot;
                    per_seed[si].push_back(std::move(rec));
                }
            }
        }
    });

    for (auto& recs : per_seed)
        for (auto& r : recs) report.runs.push_back(std::move(r));
    for (auto& warns : per_seed_warnings)
        for (auto& w : warns) report.warnings.push_back(std::move(w));
    report.pool_label_reads_during_selection = audit_reads.load();

    // medians over seeds per (strategy, k)
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> deltas;
    for (const auto& r : report.runs) deltas[{r.strategy, r.k}].push_back(r.delta);
    for (const auto& [lk, values] : deltas) report.median_delta[lk] = median(values);

    // paired t-test vs the RAND baseline, paired by seed
    std::string rand_label;
    for (const auto& spec : specs)
        if (spec.name == Strategy::kRand) {
            rand_label = spec.label();
            break;
        }
    if (!rand_label.empty()) {
        for (const auto& [lk, values] : deltas) {
            if (lk.first == rand_label) continue;
            const auto rand_it = deltas.find({rand_label, lk.second});
            if (rand_it == deltas.end()) continue;
            report.ttest_vs_rand[lk] = paired_ttest(values, rand_it->second);
        }
    }
    return report;
}

SuiteReport run_suite(const std::vector<NamedTask>& tasks,
                      const std::vector<StrategySpec>& specs, const FewshotOptions& opts,
                      std::uint64_t task_seed) {
    if (tasks.empty()) throw ValidationError("suite has no tasks");
    SuiteReport suite;
    std::map<std::string, std::string> unit_to_category;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& nt = tasks[i];
        if (unit_to_category.count(nt.name))
            throw ValidationError("duplicate task name '" + nt.name + "'");
        unit_to_category[nt.name] = nt.category;
        const SyntheticTask task = gen_synthetic(nt.cfg, derive_seed(task_seed, i));
        suite.per_task.emplace_back(nt.name, run_fewshot(task, specs, opts));
    }

    // category means of the per-task medians, one aggregation per (strategy, k)
    std::set<std::pair<std::string, std::size_t>> keys;
    for (const auto& [name, rep] : suite.per_task)
        for (const auto& [lk, v] : rep.median_delta) keys.insert(lk);
    for (const auto& lk : keys) {
        std::map<std::string, double> per_unit;
        for (const auto& [name, rep] : suite.per_task) {
            const auto it = rep.median_delta.find(lk);
            if (it != rep.median_delta.end()) per_unit[name] = it->second;
        }
        suite.category_means[lk] = aggregate_deltas(per_unit, unit_to_category);
    }
    return suite;
}

namespace {

TaskConfig task_config_from_parsed(const json& j);

}  // namespace

std::vector<NamedTask> suite_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed task config: ") + e.what());
    }
    std::vector<NamedTask> tasks;
    if (j.contains("tasks")) {
        for (const auto& t : j["tasks"]) {
            NamedTask nt;
            nt.name = t.value("name", "task" + std::to_string(tasks.size()));
            nt.category = t.value("category", "all");
            nt.cfg = task_config_from_parsed(t);
            tasks.push_back(std::move(nt));
        }
        if (tasks.empty()) throw ValidationError("empty tasks list");
    } else {
        tasks.push_back(NamedTask{"task", "all", task_config_from_parsed(j)});
    }
    return tasks;
}

TaskConfig task_config_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed task config: ") + e.what());
    }
    return task_config_from_parsed(j);
}

namespace {

TaskConfig task_config_from_parsed(const json& j) {
    TaskConfig cfg;
    if (j.contains("classes")) cfg.classes = j["classes"].get<int>();
    if (j.contains("feature_dim")) cfg.feature_dim = j["feature_dim"].get<int>();
    if (j.contains("noise")) cfg.noise = j["noise"].get<double>();
    if (j.contains("mean_radius")) cfg.mean_radius = j["mean_radius"].get<double>();
    if (j.contains("class_means"))
        cfg.class_means = j["class_means"].get<std::vector<std::vector<double>>>();
    if (j.contains("target_shift"))
        cfg.target_shift = j["target_shift"].get<std::vector<double>>();
    if (j.contains("pivot_per_class"))
        cfg.pivot_per_class = j["pivot_per_class"].get<std::vector<std::size_t>>();
    if (j.contains("pool_per_class"))
        cfg.pool_per_class = j["pool_per_class"].get<std::vector<std::size_t>>();
    if (j.contains("test_per_class"))
        cfg.test_per_class = j["test_per_class"].get<std::vector<std::size_t>>();
    if (j.contains("zero_shot_band")) {
        const auto band = j["zero_shot_band"].get<std::vector<double>>();
        if (band.size() != 2) throw ValidationError("zero_shot_band must be [lo, hi]");
        cfg.zero_shot_band = std::array<double, 2>{band[0], band[1]};
    }
    if (j.contains("token_bucket")) cfg.token_bucket = j["token_bucket"].get<double>();
    if (j.contains("learning_rate")) cfg.hyper.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("epochs")) cfg.hyper.epochs = j["epochs"].get<int>();
    if (j.contains("init_scale")) cfg.hyper.init_scale = j["init_scale"].get<double>();
    return cfg;
}

double q6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

namespace {

json report_to_json_obj(const DeltaReport& report) {
    json j;
    json runs = json::array();
    for (const auto& r : report.runs) {
        json run;
        run["strategy"] = r.strategy;
        run["k"] = r.k;
        run["seed"] = r.seed;
        run["zero_shot"] = q6(r.zero_shot);
        run["few_shot"] = q6(r.few_shot);
        run["delta"] = q6(r.delta);
        runs.push_back(run);
    }
    j["runs"] = runs;

    json medians = json::object();
    for (const auto& [lk, v] : report.median_delta)
        medians[lk.first][std::to_string(lk.second)] = q6(v);
    j["median_delta"] = medians;

    json tt = json::object();
    for (const auto& [lk, res] : report.ttest_vs_rand) {
        json r;
        r["t"] = q6(res.t);
        r["p"] = q6(res.p);
        r["df"] = res.df;
        tt[lk.first][std::to_string(lk.second)] = r;
    }
    j["ttest_vs_rand"] = tt;
    j["warnings"] = report.warnings;
    j["label_reads_during_selection"] = report.pool_label_reads_during_selection;
    return j;
}

}  // namespace

std::string report_to_json(const DeltaReport& report) {
    return report_to_json_obj(report).dump(2) + "\n";
}

std::string suite_report_to_json(const SuiteReport& report) {
    json j;
    json tasks = json::object();
    for (const auto& [name, rep] : report.per_task) tasks[name] = report_to_json_obj(rep);
    j["tasks"] = tasks;

    json cats = json::object();
    for (const auto& [lk, by_cat] : report.category_means) {
        json c = json::object();
        for (const auto& [cat, mean] : by_cat) c[cat] = q6(mean);
        cats[lk.first][std::to_string(lk.second)] = c;
    }
    j["category_means"] = cats;
    return j.dump(2) + "\n";
}

}  // namespace fewsel
