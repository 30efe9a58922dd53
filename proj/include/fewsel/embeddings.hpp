#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fewsel/tensorset.hpp"

namespace fewsel {

// Flattened last-layer gradient of the self-predicted cross-entropy loss.
// With p the class distribution, y^ = argmax p and x the last-layer input,
// the gradient w.r.t. the weight matrix is (p - e_y^) x^T and w.r.t. the
// bias is (p - e_y^); the embedding concatenates both blocks, covering the
// full affine head d = C * (h + 1). Its norm factors as
// ||p - e_y^|| * ||[x; 1]||, zero exactly at fully confident predictions.
struct GradEmbed {
    std::vector<double> vec;
    double norm = 0.0;
};

// Fixed-length vector of per-token self-predicted losses, zero-padded to m.
struct LossEmbed {
    std::vector<double> vec;
    double norm = 0.0;
};

// Norm statistics for the lambda filter (population moments over the whole
// corpus).
struct NormStats {
    double mu = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
};

struct FilterResult {
    std::vector<std::size_t> kept;  // positions, ascending
    bool fallback = false;          // filled up from below the threshold
};

// include_bias=false drops the bias block, for inputs that already carry a
// bias feature (and for sensitivity checks via --ge-no-bias).
GradEmbed gradient_embedding(std::span<const double> probs, std::span<const double> hidden,
                             bool include_bias = true);

// Entry i = -ln p_i(y^_i) for token i (argmax prediction, ties to the lowest
// class index); entries past the sentence end are exactly zero. Rejects
// sentences longer than m rather than truncating.
LossEmbed loss_embedding(const TokenDists& dists, std::size_t m);

NormStats compute_norm_stats(const std::vector<double>& norms, double lambda);

// Keeps {x : norm(x) > mu + lambda * sigma}. If fewer than `need` survive,
// fills from the excluded ids in descending norm order (ties by ascending
// position) and marks the result as fallback-augmented.
FilterResult norm_filter(const std::vector<double>& norms, const NormStats& stats,
                         std::size_t need);

// Whole-corpus embedding construction (parallel over examples).
std::vector<GradEmbed> gradient_embeddings(const TensorSet& tensors, bool include_bias,
                                           int threads = 1);
std::vector<LossEmbed> loss_embeddings(const TensorSet& tensors, int threads = 1);

}  // namespace fewsel
