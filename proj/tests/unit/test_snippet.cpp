#include "doctest.h"
#include "gradrank/rng.hpp"
#include "gradrank/snippet.hpp"
#include "support/oracles.hpp"

using namespace gradrank;

namespace {

TokenSequence make_doc(std::size_t length, const std::string& filler = "filler") {
    TokenSequence doc(length, filler);
    for (std::size_t i = 0; i < length; ++i) doc[i] = filler + std::to_string(i % 7);
    return doc;
}

}  // namespace

TEST_CASE("single match at position 30 with w=20 selects the leftmost covering window") {
    TokenSequence doc = make_doc(60);
    doc[30] = "needle";
    const SnippetSpan span = vanilla_snippet({"needle"}, doc, 20);
    CHECK(span.start == 11);
    CHECK(span.end == 31);
    CHECK(span.score == 1.0);
    CHECK(span.tokens.size() == 20);
    CHECK(span.tokens[19] == "needle");
}

TEST_CASE("short documents are returned whole with total match count") {
    TokenSequence doc = make_doc(10);
    doc[2] = "x";
    doc[7] = "x";
    const SnippetSpan span = vanilla_snippet({"x"}, doc, 20);
    CHECK(span.start == 0);
    CHECK(span.end == 10);
    CHECK(span.score == 2.0);
}

TEST_CASE("denser cluster wins over sparser one") {
    TokenSequence doc = make_doc(80);
    doc[0] = doc[3] = doc[5] = "q";   // 3 matches
    doc[50] = doc[55] = "q";          // 2 matches
    const SnippetSpan span = vanilla_snippet({"q"}, doc, 20);
    const auto [best_start, best_score] = oracle::exhaustive_best_window(
        [&] {
            std::vector<double> b(doc.size(), 0.0);
            for (std::size_t j = 0; j < doc.size(); ++j) {
                if (doc[j] == "q") b[j] = 1.0;
            }
            return b;
        }(),
        20);
    CHECK(span.start == best_start);
    CHECK(span.score == best_score);
    CHECK(span.start <= 5);
    CHECK(span.score == 3.0);
}

TEST_CASE("gradcam snippet with zero contributions reduces to vanilla") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t len = 1 + rng.below(60);
        TokenSequence doc;
        for (std::size_t i = 0; i < len; ++i) {
            doc.push_back("t" + std::to_string(rng.below(8)));
        }
        const TokenSequence query{"t0", "t3"};
        const std::size_t w = 1 + rng.below(25);
        const std::vector<double> zeros(len, 0.0);
        CHECK(gradcam_snippet(query, doc, zeros, w) == vanilla_snippet(query, doc, w));
    }
}

TEST_CASE("a contribution spike pulls the window without exact matches") {
    TokenSequence doc = make_doc(80);
    std::vector<double> contribution(80, 0.0);
    contribution[40] = 3.0;
    const SnippetSpan span = gradcam_snippet({"absent"}, doc, contribution, 20);
    CHECK(span.start == 21);
    CHECK(span.end == 41);
    CHECK(span.score == doctest::Approx(3.0 / 20.0));
}

TEST_CASE("mixed signals match the exhaustive oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = 1 + rng.below(120);
        TokenSequence doc;
        std::vector<double> contribution(len);
        for (std::size_t i = 0; i < len; ++i) {
            doc.push_back("t" + std::to_string(rng.below(10)));
            contribution[i] = rng.uniform01() < 0.3 ? rng.uniform(0.0, 4.0) : 0.0;
        }
        TokenSequence query;
        const std::size_t q_len = 1 + rng.below(4);
        for (std::size_t i = 0; i < q_len; ++i) {
            query.push_back("t" + std::to_string(rng.below(10)));
        }
        const std::size_t w = 1 + rng.below(30);

        std::vector<double> weights(len, 0.0);
        for (std::size_t j = 0; j < len; ++j) {
            for (const auto& q : query) {
                if (doc[j] == q) {
                    weights[j] = 1.0;
                    break;
                }
            }
        }
        const auto vanilla_expected = oracle::exhaustive_best_window(weights, w);
        const SnippetSpan vanilla = vanilla_snippet(query, doc, w);
        CHECK(vanilla.start == vanilla_expected.first);
        CHECK(vanilla.score == vanilla_expected.second);

        for (std::size_t j = 0; j < len; ++j) {
            weights[j] += contribution[j] / static_cast<double>(w);
        }
        const auto gradcam_expected = oracle::exhaustive_best_window(weights, w);
        const SnippetSpan gradcam = gradcam_snippet(query, doc, contribution, w);
        CHECK(gradcam.start == gradcam_expected.first);
        CHECK(gradcam.score == gradcam_expected.second);
    }
}

TEST_CASE("window score ignores tokens outside the window") {
    TokenSequence doc = make_doc(60);
    doc[10] = "q";
    const SnippetSpan before = vanilla_snippet({"q"}, doc, 8);
    doc[50] = "unrelated";
    const SnippetSpan after = vanilla_snippet({"q"}, doc, 8);
    CHECK(before.start == after.start);
    CHECK(before.score == after.score);
}

TEST_CASE("contract violations") {
    CHECK_THROWS_AS(vanilla_snippet({"q"}, {}, 5), EmptyInput);
    CHECK_THROWS_AS(vanilla_snippet({"q"}, {"a"}, 0), ConfigError);
    CHECK_THROWS_AS(gradcam_snippet({"q"}, {"a", "b"}, {0.1}, 5), ShapeError);
}
