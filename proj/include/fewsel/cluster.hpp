#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fewsel {

enum class KppFirst { kNorm, kUniform };

struct SimilarityConfig {
    int gamma = 0;  // neighbors added per center; paper grid {0, 1, 2, 3}
};

double cosine_sim(std::span<const double> a, std::span<const double> b);

// k-means++ seeding used directly as the selector (no Lloyd iterations).
// The first point is drawn with probability proportional to squared norm
// (the squared distance to an implicit center at the origin), so
// low-magnitude embeddings are unlikely to open the selection;
// KppFirst::kUniform restores the textbook uniform first draw. Every later
// point is drawn proportional to the squared Euclidean distance to its
// nearest chosen point. Draws use the portable inverse-CDF walk in ascending
// index order; if every candidate weight is zero (duplicates of chosen
// points), the draw falls back to uniform over the remainder. Returns
// positions into `embeds`, in selection order.
std::vector<std::size_t> kmeanspp_select(const std::vector<std::vector<double>>& embeds,
                                         std::size_t k, std::uint64_t seed,
                                         KppFirst first = KppFirst::kNorm, int threads = 1);

// GE(gamma) expansion: walks the centers in order, appending each center and
// then its gamma nearest not-yet-selected neighbors by cosine similarity
// (ties by ascending position), stopping at k total. The caller requests
// ceil(k / (1 + gamma)) centers so the budget lands on exactly k.
std::vector<std::size_t> expand_similar(const std::vector<std::size_t>& centers,
                                        const std::vector<std::vector<double>>& sent_embeds,
                                        const SimilarityConfig& cfg, std::size_t k,
                                        int threads = 1);

}  // namespace fewsel
