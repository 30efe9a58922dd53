#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fewsel/cluster.hpp"
#include "fewsel/corpus.hpp"
#include "fewsel/dce.hpp"
#include "fewsel/selection.hpp"
#include "fewsel/tensorset.hpp"

namespace fewsel {

enum class Strategy { kRand, kDce, kPe, kGe, kLe };

Strategy strategy_from_string(const std::string& name);
std::string strategy_to_string(Strategy s);

struct StrategySpec {
    Strategy name = Strategy::kRand;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::optional<double> lambda;     // pe zone offset / ge-le norm filter
    std::optional<int> gamma;         // ge neighbor expansion
    std::optional<std::size_t> g;     // dce batch size
    bool filter_enabled = false;      // distinguishes LE from LE(lambda)
    int ngram_order = 3;
    DceSign dce_sign = DceSign::kProse;
    KppFirst kpp_first = KppFirst::kNorm;
    bool ge_bias = true;

    // Human-readable label, e.g. "pe(lambda=1)" or "ge(gamma=2)".
    std::string label() const;
};

// Parameter legality for the named strategy. Illegal combinations throw
// ValidationError; values outside the paper's grids only warn.
void validate_spec(const StrategySpec& spec, std::vector<std::string>* warnings = nullptr);

// Dispatches to the strategy implementation. Fails before any selection work
// if a tensor array the strategy needs is absent. tensors may be null for
// rand/dce. Never reads labels.
Selection select(const StrategySpec& spec, const Corpus& corpus, const TensorSet* tensors,
                 int threads = 1, std::vector<std::string>* warnings = nullptr);

// Uniform sample without replacement (seeded Fisher-Yates prefix).
Selection select_rand(const Corpus& corpus, std::size_t k, std::uint64_t seed,
                      std::vector<std::string>* warnings = nullptr);

// Rebuilds the spec recorded in a selection file, for bit-exact re-runs.
StrategySpec spec_from_selection(const Selection& sel);

}  // namespace fewsel
