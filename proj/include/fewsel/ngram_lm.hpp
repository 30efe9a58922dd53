#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

namespace fewsel {

// Backoff n-gram language model with Witten-Bell smoothing.
//
// The vocabulary is fixed at construction from the full corpus, not from the
// training subset, so models trained on disjoint subsets assign probabilities
// over the same event space and their entropies are directly comparable.
// Witten-Bell is used because it stays well-defined on the tiny, incrementally
// grown training sets the selection loop produces (no count-of-count
// statistics required). With no training data at all, every conditional
// distribution is uniform over the vocabulary.
class NgramModel {
public:
    static constexpr const char* kBos = "<s>";
    static constexpr const char* kEos = "</s>";
    static constexpr const char* kUnk = "<unk>";

    // vocab: distinct corpus tokens; the three specials are added on top.
    NgramModel(int order, const std::vector<std::string>& vocab);

    void add_sentence(const std::vector<std::string>& tokens);

    int order() const { return order_; }
    std::size_t vocab_size() const { return id_to_token_.size(); }
    std::uint64_t total_events() const { return total_events_; }

    // p(token | context), context = up to order-1 preceding tokens, most
    // recent last. Out-of-vocabulary strings map to <unk>.
    double prob(const std::vector<std::string>& context, const std::string& token) const;

    // Entropy rate in bits/token: -(1/(n+1)) * sum log2 p over the n tokens
    // plus the </s> event, with the context padded by <s>.
    double sentence_entropy(const std::vector<std::string>& tokens) const;

    // Sorted (context, token, log2 prob) dump of all observed events, for
    // cross-checking against external toolkits.
    void dump(std::ostream& os) const;

private:
    int token_id(const std::string& token) const;
    double prob_ids(const int* context, std::size_t len, int token) const;

    struct ContextStats {
        std::unordered_map<int, std::uint64_t> counts;
        std::uint64_t total = 0;
    };

    int order_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, int> token_to_id_;
    // levels_[len]: context of `len` tokens -> follower counts
    std::vector<std::map<std::vector<int>, ContextStats>> levels_;
    std::uint64_t total_events_ = 0;
};

// Trains on `sentences` with the shared vocabulary. An empty training set is
// legal and yields the uniform model.
NgramModel train_lm(const std::vector<std::vector<std::string>>& sentences, int order,
                    const std::vector<std::string>& vocab);

}  // namespace fewsel
