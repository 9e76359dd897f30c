#include "doctest.h"
#include "gradrank/interaction.hpp"
#include "gradrank/rng.hpp"
#include "support/oracles.hpp"

using namespace gradrank;

namespace {

EmbeddingTable orthonormal_basis() {
    EmbeddingTable table(3, std::vector<double>(3, 0.0));
    table.insert("a", {1.0, 0.0, 0.0});
    table.insert("b", {0.0, 1.0, 0.0});
    table.insert("c", {0.0, 0.0, 1.0});
    return table;
}

}  // namespace

TEST_CASE("interaction matrix over an orthonormal basis") {
    const EmbeddingTable emb = orthonormal_basis();
    const Matrix m = build_interaction_matrix({"a", "b"}, {"a", "c"}, emb);
    CHECK(m == Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));

    CHECK(build_interaction_matrix({"a"}, {"a"}, emb) == Matrix::from_rows({{1.0}}));

    CHECK(build_interaction_matrix({"a", "b"}, {"b", "a", "a"}, emb) ==
          Matrix::from_rows({{0.0, 1.0, 1.0}, {1.0, 0.0, 0.0}}));
}

TEST_CASE("empty sequences are rejected") {
    const EmbeddingTable emb = orthonormal_basis();
    CHECK_THROWS_AS(build_interaction_matrix({}, {"a"}, emb), EmptyInput);
    CHECK_THROWS_AS(build_interaction_matrix({"a"}, {}, emb), EmptyInput);
}

TEST_CASE("zero-norm vectors produce similarity 0") {
    EmbeddingTable table(2, std::vector<double>(2, 0.0));
    table.insert("zero", {0.0, 0.0});
    table.insert("one", {1.0, 0.0});
    const Matrix m = build_interaction_matrix({"zero", "one"}, {"zero", "one"}, table);
    CHECK(m(0, 0) == 0.0);
    CHECK(m(0, 1) == 0.0);
    CHECK(m(1, 0) == 0.0);
    CHECK(m(1, 1) == 1.0);
}

TEST_CASE("cosine entries stay within [-1, 1]") {
    Rng rng(5);
    EmbeddingTable table(8, std::vector<double>(8, 0.0));
    TokenSequence vocab;
    for (int i = 0; i < 12; ++i) {
        const std::string tok = "t" + std::to_string(i);
        std::vector<double> v(8);
        for (auto& x : v) x = rng.uniform(-2.0, 2.0);
        table.insert(tok, v);
        vocab.push_back(tok);
    }
    const Matrix m = build_interaction_matrix(vocab, vocab, table);
    for (double v : m.values()) {
        CHECK(v >= -1.0 - 1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("flatten_columns computes column sums") {
    CHECK(flatten_columns(Matrix::from_rows({{1, 2}, {3, 4}})) == std::vector<double>{4.0, 6.0});
    CHECK(flatten_columns(Matrix::from_rows({{5, 0, -1}})) == std::vector<double>{5.0, 0.0, -1.0});
    CHECK(flatten_columns(Matrix(3, 4)) == std::vector<double>(4, 0.0));
    CHECK_THROWS_AS(flatten_columns(Matrix()), EmptyInput);
}

TEST_CASE("row permutations permute rows and leave flatten_columns unchanged") {
    const EmbeddingTable emb = orthonormal_basis();
    const TokenSequence doc{"a", "c", "b", "a"};
    const Matrix m1 = build_interaction_matrix({"a", "b", "c"}, doc, emb);
    const Matrix m2 = build_interaction_matrix({"c", "a", "b"}, doc, emb);
    for (std::size_t j = 0; j < doc.size(); ++j) {
        CHECK(m2(0, j) == m1(2, j));
        CHECK(m2(1, j) == m1(0, j));
        CHECK(m2(2, j) == m1(1, j));
    }
    CHECK(flatten_columns(m1) == flatten_columns(m2));
}

TEST_CASE("duplicate document tokens give identical columns") {
    const EmbeddingTable emb = orthonormal_basis();
    const Matrix m = build_interaction_matrix({"a", "b"}, {"c", "a", "c"}, emb);
    for (std::size_t i = 0; i < m.rows(); ++i) CHECK(m(i, 0) == m(i, 2));
}

TEST_CASE("flatten_columns is linear") {
    Rng rng(11);
    const Matrix a = oracle::random_matrix(rng, 4, 6);
    const Matrix b = oracle::random_matrix(rng, 4, 6);
    Matrix sum(4, 6);
    for (std::size_t i = 0; i < sum.size(); ++i) {
        sum.values()[i] = a.values()[i] + b.values()[i];
    }
    const auto fa = flatten_columns(a);
    const auto fb = flatten_columns(b);
    const auto fs = flatten_columns(sum);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(fs[j] == doctest::Approx(fa[j] + fb[j]).epsilon(1e-12));
    }
}
