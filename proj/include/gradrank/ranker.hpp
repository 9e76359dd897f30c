#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "gradrank/matrix.hpp"
#include "gradrank/text.hpp"

namespace gradrank {

struct ConvSpec {
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t out_channels = 8;
};

// MatchPyramid-style scorer: single-channel interaction matrix in, stack of
// size-preserving convolutions (zero padding on the right/bottom edges),
// ReLU after each, adaptive max-pool to a fixed spatial size, then an MLP
// with ReLU hidden layers and a linear scalar output.
struct RankerConfig {
    std::vector<ConvSpec> conv_layers{{3, 3, 8}, {3, 3, 16}};
    std::size_t pool_h = 4;
    std::size_t pool_w = 8;
    std::vector<std::size_t> mlp_hidden{32};
    std::uint64_t seed = 7;
};

struct ConvLayer {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::vector<double> weights;  // [out][in][ky][kx] row-major
    std::vector<double> bias;     // [out]

    double& weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) {
        return weights[((o * in_channels + i) * kernel_h + ky) * kernel_w + kx];
    }
    double weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
        return weights[((o * in_channels + i) * kernel_h + ky) * kernel_w + kx];
    }
};

struct DenseLayer {
    std::size_t in_size = 0;
    std::size_t out_size = 0;
    std::vector<double> weights;  // [out][in] row-major
    std::vector<double> bias;     // [out]
};

struct RankerModel {
    RankerConfig config;
    std::vector<ConvLayer> conv;
    std::vector<DenseLayer> dense;  // hidden layers then the scalar output layer
    // Bumped on every parameter mutation; caches record the value they were
    // built against.
    std::uint64_t revision = 0;
};

struct PoolPick {
    std::size_t row = 0;
    std::size_t col = 0;
};

// Every intermediate activation of one forward pass, bound to one input and
// one model revision.
struct ActivationCache {
    std::uint64_t model_revision = 0;
    std::size_t input_rows = 0;
    std::size_t input_cols = 0;
    Matrix input;
    std::vector<std::vector<Matrix>> conv_pre;   // [layer][channel], pre-ReLU
    std::vector<std::vector<Matrix>> conv_post;  // [layer][channel], post-ReLU
    std::vector<PoolPick> pool_argmax;           // per pooled cell, flattened [k][py][px]
    std::vector<double> pooled;                  // flattened [k][py][px]
    std::vector<std::vector<double>> dense_in;   // input vector of each dense layer
    std::vector<std::vector<double>> dense_pre;  // pre-activation of each dense layer
    double score = 0.0;

    /// A^k: post-ReLU feature maps of the last convolutional layer.
    const std::vector<Matrix>& last_feature_maps() const { return conv_post.back(); }
};

/// Validates the config. Throws ConfigError on an invalid shape spec.
void validate_config(const RankerConfig& config);

/// Xavier-uniform weights ([-s, s], s = sqrt(6 / (fan_in + fan_out))), zero
/// biases, deterministic under config.seed.
RankerModel init_model(const RankerConfig& config);

/// Total number of learnable scalars (weights + biases).
std::size_t parameter_count(const RankerModel& model);

/// Scores one interaction matrix. Throws ShapeError when the matrix is
/// smaller than the first conv kernel.
std::pair<double, ActivationCache> forward(const RankerModel& model, const Matrix& interaction);

/// forward() without keeping the cache.
double score(const RankerModel& model, const Matrix& interaction);

/// Pool + MLP head applied to externally supplied feature maps. Must agree
/// exactly with the tail of forward(); gradient oracles rely on it.
double score_from_feature_maps(const RankerModel& model, const std::vector<Matrix>& maps);

/// Exact analytic dScore/dA^k for the cache's forward pass. Max-pool routes
/// gradient to the first row-major argmax of each window. Throws
/// StaleCacheError if the model mutated since the cache was built.
std::vector<Matrix> backward_to_feature_maps(const RankerModel& model,
                                             const ActivationCache& cache);

struct TrainOptions {
    std::size_t epochs = 10;
    double lr = 0.05;
    double margin = 1.0;
};

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    std::size_t triples = 0;
    std::size_t active_triples = 0;  // triples with a positive hinge
};

/// Pairwise hinge training, plain SGD, one (query, positive, negative)
/// triple per step, records and negatives visited in order. Throws
/// DivergenceError (with the epoch index) when a loss becomes non-finite.
std::vector<EpochStats> train(RankerModel& model, const RankingDataset& data,
                              const EmbeddingTable& embeddings, const TrainOptions& options);

/// Fraction of (query, positive, negative) triples with S(Q,D+) > S(Q,D-).
double pairwise_accuracy(const RankerModel& model, const RankingDataset& data,
                         const EmbeddingTable& embeddings);

/// Binary container: magic "GRNK", u32 format version, length-prefixed UTF-8
/// JSON config, then every parameter as little-endian f64 in declaration
/// order (conv layers first, weights then bias per layer, then dense
/// layers). save(load(x)) is byte-identical to x.
void save_model(const RankerModel& model, const std::filesystem::path& path);
RankerModel load_model(const std::filesystem::path& path);

}  // namespace gradrank
