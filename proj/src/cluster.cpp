#include "fewsel/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fewsel/error.hpp"
#include "fewsel/rng.hpp"
#include "fewsel/threads.hpp"

namespace fewsel {

double cosine_sim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0)) throw ValidationError("cosine: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Inverse-CDF draw over non-negative weights in index order; uniform over the
// still-selectable entries when all weights vanish. chosen[i] marks entries
// that may no longer be drawn.
std::size_t weighted_draw(const std::vector<double>& weights, const std::vector<bool>& chosen,
                          SplitMix64& rng) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (!chosen[i]) total += weights[i];

    if (total > 0.0) {
        const double u = rng.next_double() * total;
        double cum = 0.0;
        std::size_t last = weights.size();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (chosen[i]) continue;
            cum += weights[i];
            if (weights[i] > 0.0) last = i;
            if (cum > u && weights[i] > 0.0) return i;
        }
        return last;  // u landed on the top edge of the CDF
    }

    std::size_t remaining = 0;
    for (std::size_t i = 0; i < chosen.size(); ++i)
        if (!chosen[i]) ++remaining;
    std::uint64_t pick = rng.next_below(remaining);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (chosen[i]) continue;
        if (pick == 0) return i;
        --pick;
    }
    throw Error("weighted_draw: empty candidate set");
}

}  // namespace

std::vector<std::size_t> kmeanspp_select(const std::vector<std::vector<double>>& embeds,
                                         std::size_t k, std::uint64_t seed, KppFirst first,
                                         int threads) {
    const std::size_t n = embeds.size();
    if (k > n) throw ValidationError("k exceeds number of points");
    if (n == 0 || k == 0) return {};
    const std::size_t dim = embeds[0].size();
    if (dim == 0) throw ValidationError("zero-dimensional embeddings");
    for (const auto& e : embeds)
        if (e.size() != dim) throw ValidationError("embedding dimensions differ");

    SplitMix64 rng(seed);
    std::vector<bool> chosen(n, false);
    std::vector<std::size_t> picks;
    picks.reserve(k);

    std::vector<double> weight(n);
    if (first == KppFirst::kNorm) {
        for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            for (const double v : embeds[i]) sq += v * v;
            weight[i] = sq;
        }
    } else {
        std::fill(weight.begin(), weight.end(), 1.0);
    }

    std::size_t pick = weighted_draw(weight, chosen, rng);
    chosen[pick] = true;
    picks.push_back(pick);

    // d2[i]: squared distance to the nearest chosen point
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    while (picks.size() < k) {
        const auto& latest = embeds[picks.back()];
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                if (chosen[i]) continue;
                d2[i] = std::min(d2[i], sq_dist(embeds[i], latest));
            }
        });
        pick = weighted_draw(d2, chosen, rng);
        chosen[pick] = true;
        picks.push_back(pick);
    }
    return picks;
}

std::vector<std::size_t> expand_similar(const std::vector<std::size_t>& centers,
                                        const std::vector<std::vector<double>>& sent_embeds,
                                        const SimilarityConfig& cfg, std::size_t k,
                                        int threads) {
    if (centers.empty()) throw ValidationError("expand_similar: no centers");
    if (cfg.gamma < 0) throw ValidationError("gamma must be >= 0");
    const std::size_t n = sent_embeds.size();
    for (const auto c : centers)
        if (c >= n) throw ValidationError("center without sentence embedding");

    std::vector<bool> taken(n, false);
    std::vector<std::size_t> out;
    out.reserve(std::min(k, n));

    const auto take_neighbors = [&](std::size_t center, int count) {
        if (count <= 0 || out.size() >= k) return;
        std::vector<double> sims(n, -std::numeric_limits<double>::infinity());
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                if (taken[i]) continue;
                sims[i] = cosine_sim(sent_embeds[i], sent_embeds[center]);
            }
        });
        for (int added = 0; added < count && out.size() < k; ++added) {
            std::size_t best = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (best == n || sims[i] > sims[best]) best = i;  // ties: lowest position
            }
            if (best == n) break;  // pool exhausted
            taken[best] = true;
            out.push_back(best);
        }
    };

    for (const auto center : centers) {
        if (out.size() >= k) break;
        if (!taken[center]) {
            taken[center] = true;
            out.push_back(center);
        }
        take_neighbors(center, cfg.gamma);
    }

    // A center consumed earlier as a neighbor frees one budget slot; top up
    // with further neighbors, one per center per round, in center order.
    while (out.size() < k) {
        const std::size_t before = out.size();
        for (const auto center : centers) {
            if (out.size() >= k) break;
            take_neighbors(center, 1);
        }
        if (out.size() == before) break;  // nothing left to take
    }
    return out;
}

}  // namespace fewsel
