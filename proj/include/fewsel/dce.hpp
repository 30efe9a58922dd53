#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fewsel/corpus.hpp"
#include "fewsel/selection.hpp"

namespace fewsel {

// Ranking direction for the cross-entropy difference. The paper's prose
// asks for sentences novel w.r.t. the already-selected set (high entropy
// under M_I) and representative of the remainder (low entropy under M_O),
// i.e. rank by norm_I - norm_O; its Eq. 3 as printed has the opposite sign.
// Prose is the default; Eq3 is kept for comparison.
enum class DceSign { kProse, kEq3 };

struct DceOptions {
    std::size_t g = 10;  // batch size per iteration
    int ngram_order = 3;
    DceSign sign = DceSign::kProse;
    int threads = 1;
};

// Normalized entropy-difference scores over the remaining pool L_O.
// norm_M(x) = H_M(x) / sum over L_O of H_M; with the selected set empty the
// norm_I term is 0 for every sentence, so the first batch is the most
// representative under M_O. Higher score = selected earlier.
// h_in/h_out are indexed positionally and must cover every entry of l_out.
std::vector<double> dce_scores(const std::vector<double>& h_in,
                               const std::vector<double>& h_out,
                               const std::vector<std::size_t>& l_out, bool l_in_empty,
                               DceSign sign);

// Algorithm: start with the whole corpus unselected; per iteration train one
// model on the selected sentences and one on the remainder (shared, fixed
// corpus vocabulary), score the remainder, move the top g (ties by ascending
// id) across; stop at k selected or an empty remainder. Deterministic; no
// randomness anywhere.
Selection select_dce(const Corpus& corpus, std::size_t k, const DceOptions& opts,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace fewsel
