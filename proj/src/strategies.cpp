#include "fewsel/strategies.hpp"

#include <algorithm>
#include <cmath>

#include "fewsel/embeddings.hpp"
#include "fewsel/error.hpp"
#include "fewsel/rng.hpp"
#include "fewsel/uncertainty.hpp"

namespace fewsel {

Strategy strategy_from_string(const std::string& name) {
    if (name == "rand") return Strategy::kRand;
    if (name == "dce") return Strategy::kDce;
    if (name == "pe") return Strategy::kPe;
    if (name == "ge") return Strategy::kGe;
    if (name == "le") return Strategy::kLe;
    throw ValidationError("unknown strategy '" + name + "'");
}

std::string strategy_to_string(Strategy s) {
    switch (s) {
        case Strategy::kRand: return "rand";
        case Strategy::kDce: return "dce";
        case Strategy::kPe: return "pe";
        case Strategy::kGe: return "ge";
        case Strategy::kLe: return "le";
    }
    throw Error("unreachable");
}

namespace {

std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

std::string StrategySpec::label() const {
    std::string s = strategy_to_string(name);
    std::vector<std::string> mods;
    if (name == Strategy::kPe && lambda) mods.push_back("lambda=" + trim_number(*lambda));
    if ((name == Strategy::kGe || name == Strategy::kLe) && filter_enabled && lambda)
        mods.push_back("lambda=" + trim_number(*lambda));
    if (name == Strategy::kGe && gamma && *gamma > 0)
        mods.push_back("gamma=" + std::to_string(*gamma));
    if (!mods.empty()) {
        s += "(";
        for (std::size_t i = 0; i < mods.size(); ++i) {
            if (i) s += ",";
            s += mods[i];
        }
        s += ")";
    }
    return s;
}

void validate_spec(const StrategySpec& spec, std::vector<std::string>* warnings) {
    if (spec.k < 1) throw ValidationError("k must be >= 1");
    if (spec.gamma && spec.name != Strategy::kGe)
        throw ValidationError("gamma is a GE parameter");
    if (spec.g && spec.name != Strategy::kDce)
        throw ValidationError("g is a DCE parameter");
    if (spec.lambda && (spec.name == Strategy::kRand || spec.name == Strategy::kDce))
        throw ValidationError("lambda applies to pe, ge and le only");
    if (spec.filter_enabled &&
        !(spec.name == Strategy::kGe || spec.name == Strategy::kLe))
        throw ValidationError("the norm filter applies to ge and le only");
    if (spec.filter_enabled && !spec.lambda)
        throw ValidationError("the norm filter needs a lambda value");
    if (spec.ngram_order < 1) throw ValidationError("ngram order must be >= 1");

    if (warnings) {
        if (spec.lambda && *spec.lambda != 0.0 && *spec.lambda != 0.5 && *spec.lambda != 1.0)
            warnings->push_back("lambda outside the studied grid {0, 0.5, 1}");
        if (spec.gamma && (*spec.gamma < 0 || *spec.gamma > 3))
            warnings->push_back("gamma outside the studied grid {0, 1, 2, 3}");
    }
    if (spec.gamma && *spec.gamma < 0) throw ValidationError("gamma must be >= 0");
}

Selection select_rand(const Corpus& corpus, std::size_t k, std::uint64_t seed,
                      std::vector<std::string>* warnings) {
    if (k < 1) throw ValidationError("k must be >= 1");
    const std::size_t n = corpus.size();
    if (k > n) {
        if (warnings) warnings->push_back("k exceeds corpus size; selecting all examples");
        k = n;
    }
    SplitMix64 rng(seed);
    const auto positions = sample_without_replacement(n, k, rng);

    Selection sel;
    sel.strategy = "rand";
    sel.k = k;
    sel.seed = seed;
    sel.params.pool_size = n;
    for (const auto pos : positions) {
        sel.ids.push_back(corpus.examples()[pos].id);
        sel.scores.push_back(0.0);
    }
    sel.validate();
    return sel;
}

namespace {

// Shared GE/LE core: optional lambda filter over norms, k-means++ seeding
// over the surviving embeddings, optional gamma expansion through
// sentence-embedding space.
Selection select_embedding(const StrategySpec& spec, const Corpus& corpus,
                           const TensorSet& tensors,
                           const std::vector<std::vector<double>>& embeds,
                           const std::vector<double>& norms, const std::string& strategy_name,
                           int threads, std::vector<std::string>* warnings) {
    std::size_t k = spec.k;
    const std::size_t n = corpus.size();
    if (k > n) {
        if (warnings) warnings->push_back("k exceeds corpus size; selecting all examples");
        k = n;
    }

    const int gamma = spec.gamma.value_or(0);
    const std::size_t centers_needed =
        gamma > 0 ? (k + static_cast<std::size_t>(gamma)) / (1 + static_cast<std::size_t>(gamma))
                  : k;

    // Candidate set: either the whole corpus or the norm-filtered subset.
    std::vector<std::size_t> candidates(n);
    for (std::size_t i = 0; i < n; ++i) candidates[i] = i;
    bool fallback = false;
    if (spec.filter_enabled) {
        const NormStats stats = compute_norm_stats(norms, *spec.lambda);
        const FilterResult res = norm_filter(norms, stats, centers_needed);
        candidates = res.kept;
        fallback = res.fallback;
    }

    std::vector<std::vector<double>> cand_embeds;
    cand_embeds.reserve(candidates.size());
    for (const auto pos : candidates) cand_embeds.push_back(embeds[pos]);

    const auto local_centers =
        kmeanspp_select(cand_embeds, std::min(centers_needed, candidates.size()), spec.seed,
                        spec.kpp_first, threads);
    std::vector<std::size_t> centers;
    centers.reserve(local_centers.size());
    for (const auto l : local_centers) centers.push_back(candidates[l]);

    std::vector<std::size_t> chosen;
    if (gamma > 0) {
        SimilarityConfig cfg;
        cfg.gamma = gamma;
        chosen = expand_similar(centers, tensors.sent_embed, cfg, k, threads);
    } else {
        chosen = centers;
    }

    Selection sel;
    sel.strategy = strategy_name;
    sel.k = k;
    sel.seed = spec.seed;
    sel.params.pool_size = n;
    if (spec.filter_enabled) {
        sel.params.filter = true;
        sel.params.lambda = *spec.lambda;
        sel.params.fallback = fallback;
    }
    if (gamma > 0) sel.params.gamma = gamma;
    if (spec.name == Strategy::kGe) sel.params.ge_bias = spec.ge_bias;
    sel.params.kpp_first = spec.kpp_first == KppFirst::kNorm ? "norm" : "uniform";
    for (const auto pos : chosen) {
        sel.ids.push_back(corpus.examples()[pos].id);
        sel.scores.push_back(norms[pos]);
    }
    sel.validate();
    return sel;
}

}  // namespace

Selection select(const StrategySpec& spec, const Corpus& corpus, const TensorSet* tensors,
                 int threads, std::vector<std::string>* warnings) {
    validate_spec(spec, warnings);
    if (corpus.size() == 0) throw ValidationError("empty corpus");

    StrategySpec effective = spec;
    if (spec.name == Strategy::kLe) {
        if (!tensors || !tensors->has_token_dists)
            throw ValidationError("le requires per-token class distributions");
        // The paper applies LE to sequence labeling; a classification task
        // collapses it to a single loss value, so GE takes over.
        if (tensors->is_classification()) {
            if (warnings)
                warnings->push_back(
                    "le on a classification task degenerates to one dimension; using ge");
            effective.name = Strategy::kGe;
        }
    }

    switch (effective.name) {
        case Strategy::kRand:
            return select_rand(corpus, spec.k, spec.seed, warnings);
        case Strategy::kDce: {
            DceOptions opts;
            opts.g = spec.g.value_or(10);
            opts.ngram_order = spec.ngram_order;
            opts.sign = spec.dce_sign;
            opts.threads = threads;
            return select_dce(corpus, spec.k, opts, warnings);
        }
        case Strategy::kPe: {
            if (!tensors || !tensors->has_token_dists)
                throw ValidationError("pe requires per-token class distributions");
            const PeStats stats =
                compute_pe_stats(*tensors, spec.lambda.value_or(1.0), threads);
            return select_pe(stats, corpus, spec.k, spec.seed, warnings);
        }
        case Strategy::kGe: {
            if (!tensors || !tensors->has_token_dists || !tensors->has_hidden)
                throw ValidationError(
                    "ge requires class distributions and hidden states");
            if (!tensors->is_classification())
                throw ValidationError("ge requires 1xC classification distributions");
            if (effective.gamma.value_or(0) > 0 && !tensors->has_sent_embed)
                throw ValidationError("ge with gamma > 0 requires sentence embeddings");
            const auto embeds_full = gradient_embeddings(*tensors, spec.ge_bias, threads);
            std::vector<std::vector<double>> embeds;
            std::vector<double> norms;
            embeds.reserve(embeds_full.size());
            norms.reserve(embeds_full.size());
            for (const auto& e : embeds_full) {
                embeds.push_back(e.vec);
                norms.push_back(e.norm);
            }
            return select_embedding(effective, corpus, *tensors, embeds, norms,
                                    strategy_to_string(spec.name), threads, warnings);
        }
        case Strategy::kLe: {
            const auto embeds_full = loss_embeddings(*tensors, threads);
            std::vector<std::vector<double>> embeds;
            std::vector<double> norms;
            embeds.reserve(embeds_full.size());
            norms.reserve(embeds_full.size());
            for (const auto& e : embeds_full) {
                embeds.push_back(e.vec);
                norms.push_back(e.norm);
            }
            return select_embedding(effective, corpus, *tensors, embeds, norms, "le", threads,
                                    warnings);
        }
    }
    throw Error("unreachable");
}

StrategySpec spec_from_selection(const Selection& sel) {
    StrategySpec spec;
    spec.name = strategy_from_string(sel.strategy);
    spec.k = sel.k;
    spec.seed = sel.seed;
    spec.lambda = sel.params.lambda;
    spec.gamma = sel.params.gamma;
    spec.g = sel.params.g;
    spec.filter_enabled = sel.params.filter;
    if (sel.params.ngram_order) spec.ngram_order = *sel.params.ngram_order;
    if (sel.params.dce_sign)
        spec.dce_sign = *sel.params.dce_sign == "eq3" ? DceSign::kEq3 : DceSign::kProse;
    if (sel.params.kpp_first)
        spec.kpp_first =
            *sel.params.kpp_first == "uniform" ? KppFirst::kUniform : KppFirst::kNorm;
    if (sel.params.ge_bias) spec.ge_bias = *sel.params.ge_bias;
    return spec;
}

}  // namespace fewsel
