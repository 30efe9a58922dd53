#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "fewsel/corpus.hpp"
#include "fewsel/error.hpp"
#include "fewsel/selection.hpp"
#include "fewsel/tensorset.hpp"
#include "helpers.hpp"

using namespace fewsel;

TEST_CASE("load_corpus: identity load of three records") {
    const std::string content =
        R"({"id": 0, "tokens": ["a", "b"]})" "\n"
        R"({"id": 1, "tokens": ["c"]})" "\n"
        R"({"id": 2, "tokens": ["a", "c"], "text": "a c"})" "\n";
    const Corpus corpus = parse_corpus(content, false);
    CHECK(corpus.size() == 3);
    CHECK(corpus.examples()[1].tokens == std::vector<std::string>{"c"});
    CHECK(corpus.examples()[2].text.value() == "a c");
    CHECK(corpus.vocab() == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("load_corpus: dedupe drops the later identical token sequence") {
    const std::string content =
        R"({"id": 0, "tokens": ["x", "y"]})" "\n"
        R"({"id": 1, "tokens": ["z"]})" "\n"
        R"({"id": 2, "tokens": ["x", "y"]})" "\n";
    const Corpus with = parse_corpus(content, true);
    CHECK(with.size() == 2);
    CHECK(with.duplicates_removed() == 1);
    CHECK(!with.position_of(2).has_value());

    const Corpus without = parse_corpus(content, false);
    CHECK(without.size() == 3);
    CHECK(without.duplicates_removed() == 0);
    CHECK(without.duplicate_ids() == std::vector<std::size_t>{2});
}

TEST_CASE("load_corpus: error paths") {
    CHECK_THROWS_WITH_AS(
        parse_corpus(R"({"id": 5, "tokens": ["a"]})" "\n" R"({"id": 5, "tokens": ["b"]})" "\n",
                     false),
        "duplicate id 5", ValidationError);
    CHECK_THROWS_AS(parse_corpus("", false), ValidationError);
    CHECK_THROWS_AS(parse_corpus(R"({"id": 0, "tokens": []})" "\n", false), ValidationError);
    CHECK_THROWS_AS(parse_corpus(R"({"id": 1, "tokens": ["a"]})" "\n", false), ValidationError);
    // malformed line reports its number
    try {
        parse_corpus(R"({"id": 0, "tokens": ["a"]})" "\n" "not json\n", false);
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("corpus round-trip preserves structure") {
    const auto dir = testutil::temp_dir("corpus_rt");
    const std::vector<int> labels{1, 0};
    const Corpus corpus =
        testutil::corpus_from_tokens({{"a", "b"}, {"b", "b"}}, &labels);
    const auto path = (dir / "c.jsonl").string();
    save_corpus(corpus, path);
    const Corpus back = load_corpus(path, false);
    REQUIRE(back.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CHECK(back.examples()[i].id == corpus.examples()[i].id);
        CHECK(back.examples()[i].tokens == corpus.examples()[i].tokens);
    }
    CHECK(back.has_labels());
}

TEST_CASE("tensor validation accepts good rows and rejects bad ones") {
    const Corpus corpus = testutil::corpus_from_tokens({{"a"}});
    TensorSet ts;
    ts.num_classes = 2;
    ts.has_token_dists = true;
    ts.token_dists.push_back(TokenDists{1, 2, {0.5, 0.5}});
    CHECK_NOTHROW(validate_tensors(ts, corpus));

    TensorSet bad = ts;
    bad.token_dists[0].p = {0.7, 0.7};
    try {
        validate_tensors(bad, corpus);
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("row not normalized") != std::string::npos);
    }
}

TEST_CASE("tensor file with an unknown id is rejected") {
    const auto dir = testutil::temp_dir("tensor_unknown");
    const Corpus corpus = testutil::corpus_from_tokens({{"a"}, {"b"}});
    const std::string text =
        "{\"classes\": 2, \"max_tokens\": 8}\n"
        "{\"id\": 0, \"token_dists\": [[0.5, 0.5]]}\n"
        "{\"id\": 99, \"token_dists\": [[1.0, 0.0]]}\n";
    const auto path = (dir / "t.jsonl").string();
    write_file_atomic(path, text);
    try {
        load_tensors(path, corpus);
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("unknown id 99") != std::string::npos);
    }
}

TEST_CASE("tensor binary round-trip is exact at float32 precision") {
    const auto dir = testutil::temp_dir("tensor_rt");
    const Corpus corpus = testutil::corpus_from_tokens({{"a", "b"}, {"c"}});

    TensorSet ts;
    ts.num_classes = 3;
    ts.max_tokens = 16;
    ts.has_token_dists = true;
    ts.has_hidden = true;
    ts.has_sent_embed = true;
    ts.token_dists.push_back(TokenDists{2, 3, {0.25, 0.5, 0.25, 1.0, 0.0, 0.0}});
    ts.token_dists.push_back(TokenDists{1, 3, {0.125, 0.375, 0.5}});
    ts.hidden = {{1.0, -2.0}, {0.5, 3.0}};
    ts.sent_embed = {{0.5}, {-0.5}};

    for (const bool binary : {true, false}) {
        const auto path = (dir / (binary ? "t.bin" : "t.jsonl")).string();
        save_tensors(ts, corpus, path, binary);
        const TensorSet back = load_tensors(path, corpus);
        REQUIRE(back.token_dists.size() == 2);
        CHECK(back.token_dists[0].p == ts.token_dists[0].p);  // values picked to be f32-exact
        CHECK(back.hidden == ts.hidden);
        CHECK(back.sent_embed == ts.sent_embed);
        CHECK(back.num_classes == 3);
        CHECK(back.max_tokens == 16);
    }
}

TEST_CASE("tensor binary layout is pinned byte for byte") {
    const auto dir = testutil::temp_dir("tensor_golden");
    const Corpus corpus = testutil::corpus_from_tokens({{"a"}});
    TensorSet ts;
    ts.num_classes = 2;
    ts.max_tokens = 4;
    ts.has_token_dists = true;
    ts.token_dists.push_back(TokenDists{1, 2, {0.5, 0.5}});
    const auto path = (dir / "golden.bin").string();
    save_tensors(ts, corpus, path, true);

    const std::string bytes = read_file(path);
    static const unsigned char kGolden[] = {
        'F', 'S', 'E', 'L', 'T', 'N', 'S', '1',
        1, 0, 0, 0,              // version
        2, 0, 0, 0,              // C
        4, 0, 0, 0,              // m
        1, 0, 0, 0,              // count
        1, 0, 0, 0,              // flags: token_dists only
        0, 0, 0, 0,              // hidden_dim
        0, 0, 0, 0,              // sent_dim
        0, 0, 0, 0, 1, 0, 0, 0,  // index: id 0, 1 token
        0, 0, 0, 0x3F,           // 0.5f little-endian
        0, 0, 0, 0x3F,
    };
    REQUIRE(bytes.size() == sizeof(kGolden));
    CHECK(std::memcmp(bytes.data(), kGolden, sizeof(kGolden)) == 0);
}

TEST_CASE("tensor load rejects sentences over the token cap") {
    const Corpus corpus = testutil::corpus_from_tokens({{"a", "b", "c"}});
    TensorSet ts;
    ts.num_classes = 2;
    ts.max_tokens = 2;
    ts.has_token_dists = true;
    ts.token_dists.push_back(TokenDists{3, 2, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}});
    CHECK_THROWS_AS(validate_tensors(ts, corpus), ValidationError);
}

TEST_CASE("write_selection is deterministic and validates invariants") {
    const auto dir = testutil::temp_dir("sel");
    Selection sel;
    sel.strategy = "pe";
    sel.k = 2;
    sel.seed = 7;
    sel.params.pool_size = 5;
    sel.params.lambda = 1.0;
    sel.ids = {2, 0};
    sel.scores = {0.125, 0.25};

    const auto p1 = (dir / "s1.json").string();
    const auto p2 = (dir / "s2.json").string();
    write_selection(sel, p1);
    write_selection(sel, p2);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(read_file(p1).find("\"ids\": [2, 0]") != std::string::npos);  // order preserved

    // |ids| != min(k, n) refused before write
    Selection bad = sel;
    bad.ids = {2};
    bad.scores = {0.125};
    const auto p3 = (dir / "s3.json").string();
    CHECK_THROWS_AS(write_selection(bad, p3), ValidationError);
    CHECK(!std::filesystem::exists(p3));  // nothing partial on failure

    // round-trip: parse back and re-serialize to identical bytes
    const Selection parsed = load_selection(p1);
    CHECK(selection_to_json(parsed) == read_file(p1));
    CHECK(parsed.ids == sel.ids);
    CHECK(parsed.strategy == sel.strategy);
}

TEST_CASE("label access is gated and audited") {
    const std::vector<int> labels{3, 4};
    const Corpus corpus = testutil::corpus_from_tokens({{"a"}, {"b"}}, &labels);
    CHECK(corpus.label_reads() == 0);
    // io key path (save_corpus) is the only non-harness reader
    const auto dir = testutil::temp_dir("labels");
    save_corpus(corpus, (dir / "c.jsonl").string());
    CHECK(corpus.label_reads() == 2);
}
