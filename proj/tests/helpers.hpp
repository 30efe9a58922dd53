#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here is test-only and deliberately written without reusing the library's
// selection logic, so it can serve as a second opinion.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "fewsel/corpus.hpp"
#include "fewsel/ngram_lm.hpp"
#include "fewsel/rng.hpp"
#include "fewsel/tensorset.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("fewsel_test_" + tag);
    std::filesystem::create_directories(dir);
    return dir;
}

inline fewsel::Corpus corpus_from_tokens(const std::vector<std::vector<std::string>>& sents,
                                         const std::vector<int>* labels = nullptr) {
    std::vector<fewsel::CorpusRecord> recs;
    for (std::size_t i = 0; i < sents.size(); ++i) {
        fewsel::CorpusRecord r;
        r.id = i;
        r.tokens = sents[i];
        if (labels) r.label = (*labels)[i];
        recs.push_back(std::move(r));
    }
    return fewsel::Corpus::from_records(std::move(recs), false);
}

// ---------------------------------------------------------------------------
// Brute-force transliteration of the DCE selection loop, kept independent of
// fewsel::select_dce. Shares only the language model, which has its own
// hand-computed oracle.
// ---------------------------------------------------------------------------
inline std::vector<std::size_t> brute_force_dce(
    const std::vector<std::vector<std::string>>& sentences,
    const std::vector<std::string>& vocab, std::size_t k, std::size_t g, int order,
    bool prose_sign) {
    std::vector<std::size_t> l_in;
    std::vector<std::size_t> l_out;
    for (std::size_t i = 0; i < sentences.size(); ++i) l_out.push_back(i);

    while (l_in.size() < k && !l_out.empty()) {
        std::vector<std::vector<std::string>> in_s, out_s;
        for (auto i : l_in) in_s.push_back(sentences[i]);
        for (auto i : l_out) out_s.push_back(sentences[i]);
        const fewsel::NgramModel m_in = fewsel::train_lm(in_s, order, vocab);
        const fewsel::NgramModel m_out = fewsel::train_lm(out_s, order, vocab);

        double sum_in = 0.0, sum_out = 0.0;
        std::vector<double> h_in, h_out;
        for (auto i : l_out) {
            h_in.push_back(m_in.sentence_entropy(sentences[i]));
            h_out.push_back(m_out.sentence_entropy(sentences[i]));
            sum_in += h_in.back();
            sum_out += h_out.back();
        }
        std::vector<double> score(l_out.size());
        for (std::size_t j = 0; j < l_out.size(); ++j) {
            const double norm_out = h_out[j] / sum_out;
            const double norm_in = l_in.empty() ? 0.0 : h_in[j] / sum_in;
            score[j] = prose_sign ? norm_in - norm_out : norm_out - norm_in;
        }
        // move the top g, ties by ascending id
        std::vector<std::size_t> order_idx(l_out.size());
        for (std::size_t j = 0; j < order_idx.size(); ++j) order_idx[j] = j;
        std::sort(order_idx.begin(), order_idx.end(), [&](std::size_t a, std::size_t b) {
            if (score[a] != score[b]) return score[a] > score[b];
            return l_out[a] < l_out[b];
        });
        const std::size_t take = std::min(g, l_out.size());
        std::vector<bool> moved(l_out.size(), false);
        for (std::size_t r = 0; r < take; ++r) {
            l_in.push_back(l_out[order_idx[r]]);
            moved[order_idx[r]] = true;
        }
        std::vector<std::size_t> rest;
        for (std::size_t j = 0; j < l_out.size(); ++j)
            if (!moved[j]) rest.push_back(l_out[j]);
        l_out = std::move(rest);
    }
    if (l_in.size() > k) l_in.resize(k);
    return l_in;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient of the cross-entropy loss of a concrete affine
// softmax layer, the independent oracle for the closed-form embedding. The
// layer (W = 0, b = ln probs) reproduces `probs` at input `hidden`.
// ---------------------------------------------------------------------------
inline double affine_ce_loss(const std::vector<double>& W, const std::vector<double>& b,
                             const std::vector<double>& hidden, std::size_t yhat) {
    const std::size_t C = b.size();
    const std::size_t h = hidden.size();
    std::vector<double> z(C);
    for (std::size_t i = 0; i < C; ++i) {
        z[i] = b[i];
        for (std::size_t j = 0; j < h; ++j) z[i] += W[i * h + j] * hidden[j];
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (const double v : z) denom += std::exp(v - zmax);
    return -(z[yhat] - zmax - std::log(denom));
}

// Central differences over all C*(h+1) parameters; returns [weight block,
// bias block] to match the embedding layout.
inline std::vector<double> fd_gradient(const std::vector<double>& probs,
                                       const std::vector<double>& hidden, double eps = 1e-5) {
    const std::size_t C = probs.size();
    const std::size_t h = hidden.size();
    std::size_t yhat = 0;
    for (std::size_t i = 1; i < C; ++i)
        if (probs[i] > probs[yhat]) yhat = i;

    std::vector<double> W(C * h, 0.0), b(C);
    for (std::size_t i = 0; i < C; ++i) b[i] = std::log(probs[i] > 0 ? probs[i] : 1e-12);

    std::vector<double> grad(C * h + C);
    for (std::size_t j = 0; j < C * h; ++j) {
        std::vector<double> Wp = W, Wm = W;
        Wp[j] += eps;
        Wm[j] -= eps;
        grad[j] = (affine_ce_loss(Wp, b, hidden, yhat) - affine_ce_loss(Wm, b, hidden, yhat)) /
                  (2 * eps);
    }
    for (std::size_t i = 0; i < C; ++i) {
        std::vector<double> bp = b, bm = b;
        bp[i] += eps;
        bm[i] -= eps;
        grad[C * h + i] =
            (affine_ce_loss(W, bp, hidden, yhat) - affine_ce_loss(W, bm, hidden, yhat)) /
            (2 * eps);
    }
    return grad;
}

// Random row-stochastic vector (independent draws, normalized).
inline std::vector<double> random_dist(std::size_t C, fewsel::SplitMix64& rng) {
    std::vector<double> p(C);
    double sum = 0.0;
    for (auto& v : p) {
        v = rng.next_double_open();
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

}  // namespace testutil
