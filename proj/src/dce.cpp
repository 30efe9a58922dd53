#include "fewsel/dce.hpp"

#include <algorithm>
#include <cmath>

#include "fewsel/error.hpp"
#include "fewsel/ngram_lm.hpp"
#include "fewsel/threads.hpp"

namespace fewsel {

std::vector<double> dce_scores(const std::vector<double>& h_in,
                               const std::vector<double>& h_out,
                               const std::vector<std::size_t>& l_out, bool l_in_empty,
                               DceSign sign) {
    if (h_in.size() != l_out.size() || h_out.size() != l_out.size())
        throw ValidationError("entropy vectors must cover the remaining pool");

    double sum_out = 0.0, sum_in = 0.0;
    for (const double h : h_out) sum_out += h;
    for (const double h : h_in) sum_in += h;
    if (!(sum_out > 0.0)) throw ValidationError("degenerate corpus: all H_O are zero");

    std::vector<double> scores(l_out.size());
    for (std::size_t i = 0; i < l_out.size(); ++i) {
        const double norm_out = h_out[i] / sum_out;
        // A zero-entropy selected-side model carries no signal; treat it like
        // the empty-set case rather than dividing by zero.
        const double norm_in = (l_in_empty || !(sum_in > 0.0)) ? 0.0 : h_in[i] / sum_in;
        scores[i] = sign == DceSign::kProse ? norm_in - norm_out : norm_out - norm_in;
    }
    return scores;
}

Selection select_dce(const Corpus& corpus, std::size_t k, const DceOptions& opts,
                     std::vector<std::string>* warnings) {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (opts.g < 1) throw ValidationError("dce batch size g must be >= 1");
    const std::size_t n = corpus.size();
    if (k > n) {
        if (warnings) warnings->push_back("k exceeds corpus size; selecting all examples");
        k = n;
    }

    std::vector<std::size_t> l_in;   // positions, selection order
    std::vector<std::size_t> l_out;  // positions, ascending
    l_out.resize(n);
    for (std::size_t i = 0; i < n; ++i) l_out[i] = i;

    std::vector<double> selected_scores;
    const auto& examples = corpus.examples();

    while (l_in.size() < k && !l_out.empty()) {
        std::vector<std::vector<std::string>> in_sents, out_sents;
        in_sents.reserve(l_in.size());
        out_sents.reserve(l_out.size());
        for (const auto pos : l_in) in_sents.push_back(examples[pos].tokens);
        for (const auto pos : l_out) out_sents.push_back(examples[pos].tokens);

        const NgramModel model_in = train_lm(in_sents, opts.ngram_order, corpus.vocab());
        const NgramModel model_out = train_lm(out_sents, opts.ngram_order, corpus.vocab());

        std::vector<double> h_in(l_out.size()), h_out(l_out.size());
        parallel_for(l_out.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const auto& tokens = examples[l_out[i]].tokens;
                h_in[i] = model_in.sentence_entropy(tokens);
                h_out[i] = model_out.sentence_entropy(tokens);
            }
        });

        const std::vector<double> scores =
            dce_scores(h_in, h_out, l_out, l_in.empty(), opts.sign);

        // top g by score, ties by ascending id
        std::vector<std::size_t> rank(l_out.size());
        for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
        std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return examples[l_out[a]].id < examples[l_out[b]].id;
        });
        const std::size_t take = std::min(opts.g, l_out.size());

        std::vector<bool> moved(l_out.size(), false);
        for (std::size_t r = 0; r < take; ++r) {
            const std::size_t i = rank[r];
            l_in.push_back(l_out[i]);
            selected_scores.push_back(scores[i]);
            moved[i] = true;
        }
        std::vector<std::size_t> next_out;
        next_out.reserve(l_out.size() - take);
        for (std::size_t i = 0; i < l_out.size(); ++i)
            if (!moved[i]) next_out.push_back(l_out[i]);
        l_out = std::move(next_out);
    }

    Selection sel;
    sel.strategy = "dce";
    sel.k = k;
    sel.seed = 0;
    sel.params.pool_size = n;
    sel.params.g = opts.g;
    sel.params.ngram_order = opts.ngram_order;
    sel.params.dce_sign = opts.sign == DceSign::kProse ? "prose" : "eq3";
    for (std::size_t i = 0; i < std::min(k, l_in.size()); ++i) {
        sel.ids.push_back(examples[l_in[i]].id);
        sel.scores.push_back(selected_scores[i]);
    }
    sel.validate();
    return sel;
}

}  // namespace fewsel
