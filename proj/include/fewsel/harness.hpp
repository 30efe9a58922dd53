#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fewsel/corpus.hpp"
#include "fewsel/stats.hpp"
#include "fewsel/strategies.hpp"
#include "fewsel/tensorset.hpp"

namespace fewsel {

struct TrainHyper {
    double learning_rate = 0.5;
    int epochs = 300;
    std::uint64_t seed = 0;
    double init_scale = 0.0;  // 0 = zero-initialized weights
};

struct LabeledSet {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::size_t size() const { return x.size(); }
};

// Gaussian class-conditional synthetic transfer task. The target
// distribution is shifted against the pivot by a class-mean translation and
// a class-prior skew, the stand-in for a cross-lingual transfer gap.
struct TaskConfig {
    int classes = 3;
    int feature_dim = 2;
    double noise = 1.0;
    std::vector<std::vector<double>> class_means;        // defaults to a circle
    double mean_radius = 4.0;                            // used when means defaulted
    std::vector<double> target_shift;                    // translation of target means
    std::vector<std::size_t> pivot_per_class;            // class-prior skew lives here
    std::vector<std::size_t> pool_per_class;
    std::vector<std::size_t> test_per_class;
    std::optional<std::array<double, 2>> zero_shot_band; // sanity corridor, checked per run
    double token_bucket = 1.0;                           // feature quantization for tokens
    TrainHyper hyper;
};

struct SyntheticTask {
    TaskConfig cfg;
    LabeledSet pivot_train, target_pool, target_test;
};

// Affine softmax head over raw features: weights [C x (dim+1)], bias folded
// into the last column. This is the concrete final layer the gradient
// embeddings differentiate.
struct ToyModel {
    std::size_t classes = 0;
    std::size_t feature_dim = 0;
    std::vector<double> weights;       // row-major [C][dim+1]
    std::vector<double> loss_history;  // training loss per epoch

    std::vector<double> predict(const std::vector<double>& features) const;
    std::size_t predict_class(const std::vector<double>& features) const;
};

SyntheticTask gen_synthetic(const TaskConfig& cfg, std::uint64_t seed);

// Full-batch gradient descent on the cross-entropy loss.
ToyModel train_softmax(const LabeledSet& data, std::size_t classes, const TrainHyper& hyper);

double evaluate_accuracy(const ToyModel& model, const LabeledSet& data);
std::vector<double> per_class_accuracy(const ToyModel& model, const LabeledSet& data);

// Tensors for selection, all produced by the zero-shot model:
// 1xC softmax rows, bias-augmented features as the last-layer input, raw
// features as the sentence embedding.
TensorSet model_outputs(const ToyModel& model, const std::vector<std::vector<double>>& data);

// Pool view for the selection strategies: tokens quantize the features (so
// rand/dce work on the same interface), labels ride along behind the audit
// gate and are revealed only for selected ids.
Corpus pool_corpus(const SyntheticTask& task);

struct RunRecord {
    std::string strategy;  // StrategySpec::label()
    std::size_t k = 0;
    std::uint64_t seed = 0;
    double zero_shot = 0.0;
    double few_shot = 0.0;
    double delta = 0.0;
};

struct DeltaReport {
    std::vector<RunRecord> runs;
    std::map<std::pair<std::string, std::size_t>, double> median_delta;  // (label, k)
    std::map<std::pair<std::string, std::size_t>, TTestResult> ttest_vs_rand;
    std::vector<std::string> warnings;
    std::uint64_t pool_label_reads_during_selection = 0;  // audit: must stay 0
};

struct FewshotOptions {
    std::vector<std::size_t> ks;
    std::vector<std::uint64_t> seeds;
    int rand_baselines = 3;  // RAND accuracy is averaged over this many draws
    int threads = 1;
    bool fine_tune_further = false;  // continue from zero-shot weights instead of scratch
};

// Per seed: train the zero-shot model on the pivot, score the pool with it,
// select with every strategy at every k, reveal the selected labels only,
// retrain on pivot + selected, record the few-shot delta. Medians over
// seeds; paired t-test against the RAND baseline, paired by seed.
DeltaReport run_fewshot(const SyntheticTask& task, const std::vector<StrategySpec>& specs,
                        const FewshotOptions& opts);

// Multi-task suite: each named task plays the role of one target language,
// grouped into categories like the paper's transfer-gap groups. Per-task
// medians over seeds are averaged within each category.
struct NamedTask {
    std::string name;
    std::string category;
    TaskConfig cfg;
};

struct SuiteReport {
    std::vector<std::pair<std::string, DeltaReport>> per_task;  // task name -> report
    std::map<std::pair<std::string, std::size_t>, std::map<std::string, double>>
        category_means;  // (strategy, k) -> category -> mean delta
};

SuiteReport run_suite(const std::vector<NamedTask>& tasks,
                      const std::vector<StrategySpec>& specs, const FewshotOptions& opts,
                      std::uint64_t task_seed);

TaskConfig task_config_from_json(const std::string& content);

// A config file holds either one task object or {"tasks": [{name, category,
// ...task fields}, ...]}.
std::vector<NamedTask> suite_from_json(const std::string& content);

std::string report_to_json(const DeltaReport& report);
std::string suite_report_to_json(const SuiteReport& report);

}  // namespace fewsel
