#include "fewsel/embeddings.hpp"

#include <algorithm>
#include <cmath>

#include "fewsel/error.hpp"
#include "fewsel/threads.hpp"

namespace fewsel {

namespace {

std::size_t argmax_row(std::span<const double> probs) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.size(); ++j)
        if (probs[j] > probs[best]) best = j;  // ties keep the lowest index
    return best;
}

void check_row(std::span<const double> probs) {
    double sum = 0.0;
    for (const double p : probs) {
        if (!(p >= 0.0)) throw ValidationError("negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("row not normalized");
}

}  // namespace

GradEmbed gradient_embedding(std::span<const double> probs, std::span<const double> hidden,
                             bool include_bias) {
    if (probs.empty() || hidden.empty())
        throw ValidationError("gradient embedding needs non-empty probs and hidden");
    check_row(probs);
    for (const double h : hidden)
        if (!std::isfinite(h)) throw ValidationError("non-finite hidden state");

    const std::size_t C = probs.size();
    const std::size_t h = hidden.size();
    const std::size_t yhat = argmax_row(probs);

    GradEmbed g;
    g.vec.resize(C * h + (include_bias ? C : 0));
    double delta_sq = 0.0;
    for (std::size_t i = 0; i < C; ++i) {
        const double delta = probs[i] - (i == yhat ? 1.0 : 0.0);
        delta_sq += delta * delta;
        for (std::size_t j = 0; j < h; ++j) g.vec[i * h + j] = delta * hidden[j];
        if (include_bias) g.vec[C * h + i] = delta;
    }
    double hidden_sq = include_bias ? 1.0 : 0.0;
    for (const double v : hidden) hidden_sq += v * v;
    g.norm = std::sqrt(delta_sq * hidden_sq);
    return g;
}

LossEmbed loss_embedding(const TokenDists& dists, std::size_t m) {
    if (dists.rows == 0) throw ValidationError("empty distribution matrix");
    if (dists.rows > m)
        throw ValidationError("sentence of " + std::to_string(dists.rows) +
                              " tokens exceeds cap " + std::to_string(m));
    LossEmbed l;
    l.vec.assign(m, 0.0);
    double sq = 0.0;
    for (std::size_t r = 0; r < dists.rows; ++r) {
        const std::span<const double> row(dists.row(r), dists.cols);
        check_row(row);
        const double pmax = row[argmax_row(row)];
        const double loss = -std::log(pmax);
        l.vec[r] = loss;
        sq += loss * loss;
    }
    l.norm = std::sqrt(sq);
    return l;
}

NormStats compute_norm_stats(const std::vector<double>& norms, double lambda) {
    if (norms.empty()) throw ValidationError("no norms to summarize");
    NormStats s;
    s.lambda = lambda;
    double mean = 0.0;
    for (const double v : norms) mean += v;
    mean /= static_cast<double>(norms.size());
    double var = 0.0;
    for (const double v : norms) var += (v - mean) * (v - mean);
    var /= static_cast<double>(norms.size());
    s.mu = mean;
    s.sigma = std::sqrt(var);
    return s;
}

FilterResult norm_filter(const std::vector<double>& norms, const NormStats& stats,
                         std::size_t need) {
    if (need < 1) throw ValidationError("need must be >= 1");
    const double threshold = stats.mu + stats.lambda * stats.sigma;

    FilterResult res;
    std::vector<std::size_t> excluded;
    for (std::size_t i = 0; i < norms.size(); ++i)
        (norms[i] > threshold ? res.kept : excluded).push_back(i);

    if (res.kept.size() < need) {
        res.fallback = true;
        std::sort(excluded.begin(), excluded.end(), [&](std::size_t a, std::size_t b) {
            if (norms[a] != norms[b]) return norms[a] > norms[b];
            return a < b;
        });
        for (const auto i : excluded) {
            if (res.kept.size() >= need) break;
            res.kept.push_back(i);
        }
        std::sort(res.kept.begin(), res.kept.end());
    }
    return res;
}

std::vector<GradEmbed> gradient_embeddings(const TensorSet& tensors, bool include_bias,
                                           int threads) {
    if (!tensors.has_token_dists || !tensors.has_hidden)
        throw ValidationError("ge requires class distributions and hidden states");
    if (!tensors.is_classification())
        throw ValidationError("ge requires 1xC classification distributions");
    const std::size_t n = tensors.token_dists.size();
    std::vector<GradEmbed> out(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = gradient_embedding(
                std::span<const double>(tensors.token_dists[i].row(0), tensors.token_dists[i].cols),
                tensors.hidden[i], include_bias);
    });
    return out;
}

std::vector<LossEmbed> loss_embeddings(const TensorSet& tensors, int threads) {
    if (!tensors.has_token_dists)
        throw ValidationError("le requires per-token class distributions");
    const std::size_t n = tensors.token_dists.size();
    std::vector<LossEmbed> out(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = loss_embedding(tensors.token_dists[i], tensors.max_tokens);
    });
    return out;
}

}  // namespace fewsel
