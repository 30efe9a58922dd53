#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fewsel/corpus.hpp"

namespace fewsel {

// Per-token class distributions for one example, row-major [rows x cols].
struct TokenDists {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> p;

    double at(std::size_t r, std::size_t c) const { return p[r * cols + c]; }
    const double* row(std::size_t r) const { return p.data() + r * cols; }
};

// Model-derived arrays aligned with corpus positions. Any of the three
// arrays may be absent as a whole; a strategy that needs a missing one must
// fail before selection starts.
struct TensorSet {
    std::uint32_t num_classes = 0;  // C
    std::uint32_t max_tokens = 128; // m

    bool has_token_dists = false;
    bool has_hidden = false;
    bool has_sent_embed = false;

    std::vector<TokenDists> token_dists;            // per corpus position
    std::vector<std::vector<double>> hidden;        // dim h each
    std::vector<std::vector<double>> sent_embed;    // dim e each

    std::size_t hidden_dim() const { return has_hidden && !hidden.empty() ? hidden[0].size() : 0; }
    std::size_t sent_dim() const {
        return has_sent_embed && !sent_embed.empty() ? sent_embed[0].size() : 0;
    }

    // True when every example carries a single distribution row, the
    // classification-task shape.
    bool is_classification() const;
};

// Checks every TensorSet invariant against the corpus: ids resolve, row
// counts match the corpus token counts (or are 1xC for classification),
// rows are non-negative and sum to 1 +/- 1e-6, n_tokens <= m.
void validate_tensors(const TensorSet& ts, const Corpus& corpus);

// Packed little-endian float32 container, magic "FSELTNS1"; a line-delimited
// JSON text fallback (first line {"classes": C, "max_tokens": m}) is accepted
// for small fixtures. The format is detected from the first eight bytes.
TensorSet load_tensors(const std::string& path, const Corpus& corpus);

void save_tensors(const TensorSet& ts, const Corpus& corpus, const std::string& path,
                  bool binary = true);

}  // namespace fewsel
