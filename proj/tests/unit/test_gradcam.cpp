#include <cmath>

#include "doctest.h"
#include "gradrank/gradcam.hpp"
#include "gradrank/interaction.hpp"
#include "gradrank/stats.hpp"
#include "support/oracles.hpp"

using namespace gradrank;

TEST_CASE("importance weights are gradient map means") {
    CHECK(importance_weights({Matrix(2, 2, 1.0)}) == std::vector<double>{1.0});
    CHECK(importance_weights({Matrix::from_rows({{1, 2}, {3, 4}})}) == std::vector<double>{2.5});
    CHECK(importance_weights({Matrix(3, 3), Matrix(3, 3)}) == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(importance_weights({Matrix(2, 2), Matrix(2, 3)}), ShapeError);
    CHECK_THROWS_AS(importance_weights({}), ShapeError);
}

TEST_CASE("importance weights scale linearly") {
    Rng rng(21);
    std::vector<Matrix> grads{oracle::random_matrix(rng, 3, 4), oracle::random_matrix(rng, 3, 4)};
    const auto alpha = importance_weights(grads);
    std::vector<Matrix> scaled = grads;
    for (auto& g : scaled) {
        for (auto& v : g.values()) v *= -2.5;
    }
    const auto alpha_scaled = importance_weights(scaled);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        CHECK(alpha_scaled[k] == doctest::Approx(-2.5 * alpha[k]).epsilon(1e-12));
    }
}

TEST_CASE("localization map is the ReLU of the weighted combination") {
    const Matrix a = Matrix::from_rows({{1, -1}, {2, -2}});
    CHECK(localization_map({1.0}, {a}) == Matrix::from_rows({{1, 0}, {2, 0}}));
    CHECK(localization_map({-1.0}, {a}) == Matrix::from_rows({{0, 1}, {0, 2}}));
    CHECK(localization_map({1.0, 1.0}, {Matrix(1, 1, 1.0), Matrix(1, 1, -2.0)}) ==
          Matrix(1, 1, 0.0));
    CHECK_THROWS_AS(localization_map({1.0}, {a, a}), ShapeError);
    CHECK_THROWS_AS(localization_map({1.0, 2.0}, {a}), ShapeError);
}

TEST_CASE("localization map is non-negative and positively homogeneous") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Matrix> maps;
        std::vector<double> alpha;
        const std::size_t k = 1 + rng.below(4);
        for (std::size_t i = 0; i < k; ++i) {
            maps.push_back(oracle::random_matrix(rng, 4, 5));
            alpha.push_back(rng.uniform(-2.0, 2.0));
        }
        const Matrix base = localization_map(alpha, maps);
        for (double v : base.values()) CHECK(v >= 0.0);

        const double c = rng.uniform(0.1, 3.0);
        std::vector<double> alpha_scaled = alpha;
        for (auto& v : alpha_scaled) v *= c;
        const Matrix scaled = localization_map(alpha_scaled, maps);
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(scaled.values()[i] == doctest::Approx(c * base.values()[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("bilinear upsample: identity at equal size") {
    Rng rng(23);
    const Matrix src = oracle::random_matrix(rng, 5, 7);
    CHECK(bilinear_upsample(src, 5, 7) == src);
}

TEST_CASE("bilinear upsample: degenerate axes replicate") {
    CHECK(bilinear_upsample(Matrix(1, 1, 5.0), 3, 3) == Matrix(3, 3, 5.0));
    const Matrix row = Matrix::from_rows({{1.0, 3.0}});
    const Matrix up = bilinear_upsample(row, 4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(up(i, 0) == 1.0);
        CHECK(up(i, 1) == 3.0);
    }
}

TEST_CASE("bilinear upsample 2x2 -> 4x4 matches the per-cell formula oracle") {
    const Matrix src = Matrix::from_rows({{0.0, 1.0}, {2.0, 3.0}});
    const Matrix up = bilinear_upsample(src, 4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(up(i, j) == doctest::Approx(oracle::bilinear_formula(src, 4, 4, i, j))
                                  .epsilon(1e-14));
        }
    }
    // corners preserved exactly under align-corners
    CHECK(up(0, 0) == 0.0);
    CHECK(up(0, 3) == 1.0);
    CHECK(up(3, 0) == 2.0);
    CHECK(up(3, 3) == 3.0);
}

TEST_CASE("bilinear upsample rejects downsampling") {
    CHECK_THROWS_AS(bilinear_upsample(Matrix(4, 4, 1.0), 3, 8), ShapeError);
    CHECK_THROWS_AS(bilinear_upsample(Matrix(4, 4, 1.0), 8, 3), ShapeError);
}

TEST_CASE("bilinear upsample stays within source bounds") {
    Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t su = 1 + rng.below(6), sv = 1 + rng.below(6);
        const Matrix src = oracle::random_matrix(rng, su, sv, -3.0, 3.0);
        double lo = src(0, 0), hi = src(0, 0);
        for (double v : src.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const Matrix up = bilinear_upsample(src, su + rng.below(20), sv + rng.below(20));
        for (double v : up.values()) {
            CHECK(v >= lo);
            CHECK(v <= hi);
        }
    }
}

TEST_CASE("explain equals the manually composed pipeline") {
    const SyntheticCorpus corpus = generate_synthetic_corpus(3, 25, 61);
    RankerConfig config;
    config.conv_layers = {{2, 2, 3}};
    config.pool_h = 2;
    config.pool_w = 4;
    config.mlp_hidden = {6};
    config.seed = 3;
    const RankerModel model = init_model(config);

    const auto& record = corpus.dataset.records[0];
    const ExplanationReport report =
        explain(model, record.query, record.positive, corpus.embeddings);

    const Matrix m = build_interaction_matrix(record.query, record.positive, corpus.embeddings);
    const auto [s, cache] = forward(model, m);
    const auto grads = backward_to_feature_maps(model, cache);
    const auto alpha = importance_weights(grads);
    const Matrix raw = localization_map(alpha, cache.last_feature_maps());
    const Matrix upsampled = bilinear_upsample(raw, m.rows(), m.cols());

    CHECK(report.score == s);
    CHECK(report.localization == upsampled);
    CHECK(report.contributions == flatten_columns(upsampled));
    CHECK(report.similarities == flatten_columns(m));
    CHECK(report.total == map_total(upsampled));
}

TEST_CASE("explain report dimensions are consistent") {
    const SyntheticCorpus corpus = generate_synthetic_corpus(2, 22, 62);
    const RankerModel model = init_model(RankerConfig{});
    const auto& record = corpus.dataset.records[0];
    const ExplanationReport report =
        explain(model, record.query, record.positive, corpus.embeddings);

    CHECK(report.localization.rows() == record.query.size());
    CHECK(report.localization.cols() == record.positive.size());
    CHECK(report.contributions.size() == record.positive.size());
    CHECK(report.similarities.size() == record.positive.size());
    for (double v : report.localization.values()) CHECK(v >= 0.0);
}

TEST_CASE("zero-head models explain to an all-zero map") {
    const SyntheticCorpus corpus = generate_synthetic_corpus(2, 22, 63);
    RankerModel model = init_model(RankerConfig{});
    for (auto& layer : model.dense) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    const auto& record = corpus.dataset.records[0];
    const ExplanationReport report =
        explain(model, record.query, record.positive, corpus.embeddings);
    for (double v : report.localization.values()) CHECK(v == 0.0);
    for (double v : report.contributions) CHECK(v == 0.0);
    CHECK_FALSE(report.kurtosis.has_value());
    CHECK(report.total == 0.0);
}

TEST_CASE("pipeline map matches the brute-force finite-difference construction") {
    Rng rng(2025);
    int done = 0, attempts = 0;
    while (done < 3 && attempts < 30) {
        ++attempts;
        RankerConfig config;
        config.conv_layers = {{2, 2, 2}};
        config.pool_h = 2;
        config.pool_w = 2;
        config.mlp_hidden = {3};
        config.seed = 500 + static_cast<std::uint64_t>(attempts);
        const RankerModel model = init_model(config);
        const Matrix m = oracle::random_matrix(rng, 4, 5);

        const auto [s, cache] = forward(model, m);
        const auto oracle_map = oracle::fd_gradcam_map(model, cache.last_feature_maps());
        if (!oracle_map) continue;  // FD undefined at a kink; redraw the case

        const auto grads = backward_to_feature_maps(model, cache);
        const Matrix pipeline = localization_map(importance_weights(grads),
                                                 cache.last_feature_maps());
        REQUIRE(pipeline.same_shape(*oracle_map));
        double scale = 1e-12;
        for (double v : pipeline.values()) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < pipeline.size(); ++i) {
            CHECK(std::abs(pipeline.values()[i] - oracle_map->values()[i]) <= 1e-3 * scale);
        }
        ++done;
    }
    CHECK(done == 3);
}
