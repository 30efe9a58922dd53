#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fewsel {

// Everything needed to re-run a selection, recorded into the output file.
struct SelectionParams {
    std::size_t pool_size = 0;
    std::optional<double> lambda;
    std::optional<int> gamma;
    std::optional<std::size_t> g;         // DCE batch size
    std::optional<int> ngram_order;       // DCE
    std::optional<std::string> dce_sign;  // "prose" | "eq3"
    std::optional<std::string> kpp_first; // "norm" | "uniform"
    std::optional<bool> ge_bias;          // GE bias block on/off
    bool filter = false;                  // lambda-filter enabled (GE/LE)
    bool fallback = false;                // norm filter fell back below threshold
};

struct Selection {
    std::string strategy;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> ids;    // selection order
    std::vector<double> scores;      // aligned with ids
    SelectionParams params;

    void validate() const;  // ids distinct, |ids| = min(k, pool), scores aligned
};

// Deterministic serialization: keys sorted, floats printed with exactly six
// decimal places. Identical Selections produce byte-identical files.
std::string selection_to_json(const Selection& sel);
void write_selection(const Selection& sel, const std::string& path);

Selection parse_selection(const std::string& content);
Selection load_selection(const std::string& path);

}  // namespace fewsel
