#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fewsel/selection.hpp"
#include "fewsel/tensorset.hpp"

namespace fewsel {

// Corpus-level predictive-entropy statistics. mu and sigma are computed over
// every example in the corpus (population moments), never over a subset.
struct PeStats {
    std::vector<double> pe;  // per corpus position
    double mu = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
};

// Shannon entropy -sum p ln p (natural log, 0 ln 0 = 0) of one distribution.
// Throws on rows that are negative or off-normalized by more than 1e-6.
double token_entropy(std::span<const double> dist);

// Mean of the per-token entropies; a classification example is one row.
double sentence_pe(const TokenDists& dists);

PeStats compute_pe_stats(const TensorSet& tensors, double lambda, int threads = 1);

// Picks the k examples whose PE is closest to the preferred zone
// mu + lambda * sigma (smallest |deviation|, ties by ascending id).
Selection select_pe(const PeStats& stats, const Corpus& corpus, std::size_t k,
                    std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

}  // namespace fewsel
