#include <doctest.h>

#include <cmath>

#include "fewsel/error.hpp"
#include "fewsel/rng.hpp"
#include "fewsel/uncertainty.hpp"
#include "helpers.hpp"

using namespace fewsel;

TEST_CASE("token_entropy: certainty, uniform and coin-flip values") {
    const std::vector<double> onehot{1.0, 0.0, 0.0};
    CHECK(token_entropy(onehot) == 0.0);

    // C = 7 (NER) and C = 18 (POS) uniform rows hit ln C
    for (const std::size_t C : {7u, 18u}) {
        std::vector<double> uniform(C, 1.0 / static_cast<double>(C));
        CHECK(token_entropy(uniform) ==
              doctest::Approx(std::log(static_cast<double>(C))).epsilon(1e-12));
    }
    CHECK(token_entropy(std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(doctest::Approx(1.945910).epsilon(1e-6) == std::log(7.0));

    CHECK_THROWS_AS(token_entropy(std::vector<double>{0.7, 0.7}), ValidationError);
}

TEST_CASE("sentence_pe averages token entropies") {
    TokenDists single{1, 2, {0.5, 0.5}};
    CHECK(sentence_pe(single) == token_entropy(std::vector<double>{0.5, 0.5}));

    TokenDists two{2, 2, {1.0, 0.0, 0.5, 0.5}};
    CHECK(sentence_pe(two) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(sentence_pe(two) == doctest::Approx(0.346574).epsilon(1e-6));

    TokenDists same{3, 2, {0.25, 0.75, 0.25, 0.75, 0.25, 0.75}};
    CHECK(sentence_pe(same) ==
          doctest::Approx(token_entropy(std::vector<double>{0.25, 0.75})).epsilon(1e-12));

    CHECK_THROWS_AS(sentence_pe(TokenDists{0, 2, {}}), ValidationError);
}

namespace {

TensorSet tensors_with_pe(const std::vector<double>& targets) {
    // single-row two-class distributions whose entropy is controlled by a
    // bisection on p: H(p) = -p ln p - (1-p) ln (1-p)
    TensorSet ts;
    ts.num_classes = 2;
    ts.has_token_dists = true;
    for (const double target : targets) {
        double lo = 0.5, hi = 1.0 - 1e-12;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double h = -mid * std::log(mid) - (1 - mid) * std::log(1 - mid);
            (h > target ? lo : hi) = mid;
        }
        const double p = 0.5 * (lo + hi);
        ts.token_dists.push_back(TokenDists{1, 2, {p, 1 - p}});
    }
    return ts;
}

}  // namespace

TEST_CASE("select_pe picks the ids nearest the mu + lambda sigma zone") {
    // pe = {0.1, 0.2, 0.6}: mu = 0.3, scores for lambda = 0 are {0.2, 0.1, 0.3}
    const TensorSet ts = tensors_with_pe({0.1, 0.2, 0.6});
    const Corpus corpus = testutil::corpus_from_tokens({{"a"}, {"b"}, {"c"}});
    const PeStats stats = compute_pe_stats(ts, 0.0);
    CHECK(stats.mu == doctest::Approx(0.3).epsilon(1e-9));

    const Selection sel = select_pe(stats, corpus, 1, 0);
    REQUIRE(sel.ids.size() == 1);
    CHECK(sel.ids[0] == 1);
    CHECK(sel.scores[0] == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("select_pe: equal pe values fall back to id-order ties") {
    const TensorSet ts = tensors_with_pe({0.4, 0.4, 0.4, 0.4});
    const Corpus corpus = testutil::corpus_from_tokens({{"a"}, {"b"}, {"c"}, {"d"}});
    const PeStats stats = compute_pe_stats(ts, 1.0);
    CHECK(stats.sigma == doctest::Approx(0.0).epsilon(1e-12));
    const Selection sel = select_pe(stats, corpus, 2, 0);
    CHECK(sel.ids == std::vector<std::size_t>{0, 1});
}

TEST_CASE("token_entropy bounds hold on random distributions") {
    SplitMix64 rng(20240817);
    for (const std::size_t C : {2u, 7u, 18u}) {
        for (int i = 0; i < 2000; ++i) {
            const auto dist = testutil::random_dist(C, rng);
            const double h = token_entropy(dist);
            CHECK(h >= 0.0);
            CHECK(h <= std::log(static_cast<double>(C)) + 1e-12);
        }
    }
}

TEST_CASE("select_pe is invariant under corpus relabeling") {
    // permute the example order but keep (id -> pe) fixed; the chosen id set
    // must not change
    const std::vector<double> pes{0.12, 0.5, 0.33, 0.47, 0.21};
    const TensorSet ts = tensors_with_pe(pes);
    const Corpus corpus =
        testutil::corpus_from_tokens({{"a"}, {"b"}, {"c"}, {"d"}, {"e"}});
    const PeStats stats = compute_pe_stats(ts, 0.5);
    const Selection base = select_pe(stats, corpus, 2, 0);

    const std::vector<std::size_t> perm{4, 2, 0, 1, 3};  // position -> original index
    std::vector<double> permuted_pe(pes.size());
    for (std::size_t pos = 0; pos < perm.size(); ++pos) permuted_pe[pos] = pes[perm[pos]];
    const TensorSet ts_perm = tensors_with_pe(permuted_pe);
    const PeStats stats_perm = compute_pe_stats(ts_perm, 0.5);
    const Selection moved = select_pe(stats_perm, corpus, 2, 0);

    // map selected positions back through the permutation
    std::vector<std::size_t> mapped;
    for (const auto id : moved.ids) mapped.push_back(perm[id]);
    std::sort(mapped.begin(), mapped.end());
    std::vector<std::size_t> expected(base.ids.begin(), base.ids.end());
    std::sort(expected.begin(), expected.end());
    CHECK(mapped == expected);
}

TEST_CASE("pe stats are identical for 1 and 8 threads") {
    SplitMix64 rng(99);
    std::vector<double> targets;
    for (int i = 0; i < 100; ++i) targets.push_back(0.05 + 0.6 * rng.next_double());
    const TensorSet ts = tensors_with_pe(targets);
    const PeStats s1 = compute_pe_stats(ts, 1.0, 1);
    const PeStats s8 = compute_pe_stats(ts, 1.0, 8);
    CHECK(s1.mu == s8.mu);
    CHECK(s1.sigma == s8.sigma);
    CHECK(s1.pe == s8.pe);
}
