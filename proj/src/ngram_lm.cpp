#include "fewsel/ngram_lm.hpp"

#include <algorithm>
#include <cmath>

#include "fewsel/error.hpp"

namespace fewsel {

NgramModel::NgramModel(int order, const std::vector<std::string>& vocab) : order_(order) {
    if (order < 1) throw ValidationError("ngram order must be >= 1");
    id_to_token_ = {kBos, kEos, kUnk};
    for (const auto& t : vocab) {
        if (t == kBos || t == kEos || t == kUnk) continue;
        id_to_token_.push_back(t);
    }
    std::sort(id_to_token_.begin() + 3, id_to_token_.end());
    for (std::size_t i = 0; i < id_to_token_.size(); ++i)
        token_to_id_.emplace(id_to_token_[i], static_cast<int>(i));
    if (id_to_token_.empty()) throw ValidationError("empty vocabulary");
    levels_.resize(static_cast<std::size_t>(order_));
}

int NgramModel::token_id(const std::string& token) const {
    const auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? 2 /* <unk> */ : it->second;
}

void NgramModel::add_sentence(const std::vector<std::string>& tokens) {
    const std::size_t ctx_max = static_cast<std::size_t>(order_ - 1);
    std::vector<int> seq(ctx_max, 0 /* <s> */);
    seq.reserve(ctx_max + tokens.size() + 1);
    for (const auto& t : tokens) seq.push_back(token_id(t));
    seq.push_back(1 /* </s> */);

    // every predicted event feeds all backoff levels
    for (std::size_t i = ctx_max; i < seq.size(); ++i) {
        const int token = seq[i];
        for (std::size_t len = 0; len <= ctx_max; ++len) {
            std::vector<int> ctx(seq.begin() + static_cast<std::ptrdiff_t>(i - len),
                                 seq.begin() + static_cast<std::ptrdiff_t>(i));
            auto& stats = levels_[len][std::move(ctx)];
            ++stats.counts[token];
            ++stats.total;
        }
        ++total_events_;
    }
}

// Interpolated Witten-Bell:
//   p(w | ctx) = (c(ctx, w) + T(ctx) * p(w | shorter ctx)) / (c(ctx) + T(ctx))
// where T(ctx) is the number of distinct followers of ctx. The recursion
// bottoms out at the uniform distribution 1/|V|, which keeps every
// conditional distribution normalized over the full vocabulary.
double NgramModel::prob_ids(const int* context, std::size_t len, int token) const {
    if (len == 0) {
        const auto it = levels_[0].find(std::vector<int>{});
        if (it == levels_[0].end() || it->second.total == 0)
            return 1.0 / static_cast<double>(vocab_size());
        const auto& stats = it->second;
        const double T = static_cast<double>(stats.counts.size());
        const double c = static_cast<double>(stats.total);
        const auto cit = stats.counts.find(token);
        const double cw = cit == stats.counts.end() ? 0.0 : static_cast<double>(cit->second);
        return (cw + T / static_cast<double>(vocab_size())) / (c + T);
    }
    const auto it = levels_[len].find(std::vector<int>(context, context + len));
    if (it == levels_[len].end() || it->second.total == 0)
        return prob_ids(context + 1, len - 1, token);
    const auto& stats = it->second;
    const double T = static_cast<double>(stats.counts.size());
    const double c = static_cast<double>(stats.total);
    const auto cit = stats.counts.find(token);
    const double cw = cit == stats.counts.end() ? 0.0 : static_cast<double>(cit->second);
    return (cw + T * prob_ids(context + 1, len - 1, token)) / (c + T);
}

double NgramModel::prob(const std::vector<std::string>& context,
                        const std::string& token) const {
    const std::size_t ctx_max = static_cast<std::size_t>(order_ - 1);
    std::vector<int> ctx;
    const std::size_t take = std::min(context.size(), ctx_max);
    for (std::size_t i = context.size() - take; i < context.size(); ++i)
        ctx.push_back(token_id(context[i]));
    return prob_ids(ctx.data(), ctx.size(), token_id(token));
}

double NgramModel::sentence_entropy(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) throw ValidationError("cannot score an empty token sequence");
    const std::size_t ctx_max = static_cast<std::size_t>(order_ - 1);

    // Uniform fast path keeps the empty-model entropy exactly log2 |V|.
    if (total_events_ == 0)
        return std::log2(static_cast<double>(vocab_size()));

    std::vector<int> seq(ctx_max, 0 /* <s> */);
    seq.reserve(ctx_max + tokens.size() + 1);
    for (const auto& t : tokens) seq.push_back(token_id(t));
    seq.push_back(1 /* </s> */);

    double log_sum = 0.0;
    for (std::size_t i = ctx_max; i < seq.size(); ++i)
        log_sum += std::log2(prob_ids(seq.data() + (i - ctx_max), ctx_max, seq[i]));
    return -log_sum / static_cast<double>(tokens.size() + 1);
}

void NgramModel::dump(std::ostream& os) const {
    for (std::size_t len = 0; len < levels_.size(); ++len) {
        for (const auto& [ctx, stats] : levels_[len]) {
            std::map<int, std::uint64_t> ordered(stats.counts.begin(), stats.counts.end());
            for (const auto& [token, count] : ordered) {
                std::string ctx_str;
                for (const int c : ctx) {
                    if (!ctx_str.empty()) ctx_str += ' ';
                    ctx_str += id_to_token_[static_cast<std::size_t>(c)];
                }
                os << ctx_str << '\t' << id_to_token_[static_cast<std::size_t>(token)] << '\t'
                   << std::log2(prob_ids(ctx.data(), ctx.size(), token)) << '\n';
            }
        }
    }
}

NgramModel train_lm(const std::vector<std::vector<std::string>>& sentences, int order,
                    const std::vector<std::string>& vocab) {
    NgramModel model(order, vocab);
    for (const auto& s : sentences) model.add_sentence(s);
    return model;
}

}  // namespace fewsel
