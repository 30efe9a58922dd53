#include "fewsel/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "fewsel/error.hpp"
#include "fewsel/threads.hpp"

namespace fewsel {

double token_entropy(std::span<const double> dist) {
    double sum = 0.0;
    double h = 0.0;
    for (const double p : dist) {
        if (!(p >= 0.0)) throw ValidationError("negative probability");
        sum += p;
        if (p > 0.0) h -= p * std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("row not normalized");
    return h;
}

double sentence_pe(const TokenDists& dists) {
    if (dists.rows == 0) throw ValidationError("empty distribution matrix");
    double total = 0.0;
    for (std::size_t r = 0; r < dists.rows; ++r)
        total += token_entropy(std::span<const double>(dists.row(r), dists.cols));
    return total / static_cast<double>(dists.rows);
}

PeStats compute_pe_stats(const TensorSet& tensors, double lambda, int threads) {
    if (!tensors.has_token_dists)
        throw ValidationError("pe requires per-token class distributions");
    const std::size_t n = tensors.token_dists.size();
    if (n == 0) throw ValidationError("empty tensor set");

    PeStats stats;
    stats.lambda = lambda;
    stats.pe.resize(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) stats.pe[i] = sentence_pe(tensors.token_dists[i]);
    });

    double mean = 0.0;
    for (const double v : stats.pe) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const double v : stats.pe) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    stats.mu = mean;
    stats.sigma = std::sqrt(var);
    return stats;
}

Selection select_pe(const PeStats& stats, const Corpus& corpus, std::size_t k,
                    std::uint64_t seed, std::vector<std::string>* warnings) {
    if (k < 1) throw ValidationError("k must be >= 1");
    const std::size_t n = stats.pe.size();
    if (n != corpus.size()) throw ValidationError("pe stats do not cover corpus");
    if (k > n) {
        if (warnings) warnings->push_back("k exceeds corpus size; selecting all examples");
        k = n;
    }

    const double target = stats.mu + stats.lambda * stats.sigma;
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[i] = i;
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        const double da = std::abs(stats.pe[a] - target);
        const double db = std::abs(stats.pe[b] - target);
        if (da != db) return da < db;
        return corpus.examples()[a].id < corpus.examples()[b].id;
    });

    Selection sel;
    sel.strategy = "pe";
    sel.k = k;
    sel.seed = seed;
    sel.params.pool_size = n;
    sel.params.lambda = stats.lambda;
    for (std::size_t i = 0; i < k; ++i) {
        sel.ids.push_back(corpus.examples()[rank[i]].id);
        sel.scores.push_back(std::abs(stats.pe[rank[i]] - target));
    }
    sel.validate();
    return sel;
}

}  // namespace fewsel
