#include "gradrank/ranker.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "gradrank/interaction.hpp"
#include "gradrank/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace gradrank {

namespace {

// Adaptive pooling window along one axis: output cell o of p covers source
// indices [o*n/p, ceil((o+1)*n/p)). Never empty for n, p >= 1.
std::pair<std::size_t, std::size_t> pool_window(std::size_t o, std::size_t p, std::size_t n) {
    const std::size_t start = (o * n) / p;
    const std::size_t end = ((o + 1) * n + p - 1) / p;
    return {start, end};
}

struct HeadPass {
    std::vector<PoolPick> pool_argmax;
    std::vector<double> pooled;
    std::vector<std::vector<double>> dense_in;
    std::vector<std::vector<double>> dense_pre;
    double score = 0.0;
};

// Adaptive max-pool + MLP. Shared verbatim between forward() and
// score_from_feature_maps() so finite-difference probes of the feature maps
// exercise the exact production path.
HeadPass run_head(const RankerModel& model, const std::vector<Matrix>& maps) {
    const std::size_t channels = model.config.conv_layers.back().out_channels;
    if (maps.size() != channels) {
        throw ShapeError("expected " + std::to_string(channels) + " feature maps, got " +
                         std::to_string(maps.size()));
    }
    for (const auto& m : maps) {
        if (m.empty()) throw ShapeError("feature map has no elements");
        if (!m.same_shape(maps.front())) throw ShapeError("feature maps differ in shape");
    }

    const std::size_t ph = model.config.pool_h;
    const std::size_t pw = model.config.pool_w;
    const std::size_t rows = maps.front().rows();
    const std::size_t cols = maps.front().cols();

    HeadPass pass;
    pass.pooled.resize(channels * ph * pw);
    pass.pool_argmax.resize(channels * ph * pw);
    std::size_t idx = 0;
    for (std::size_t k = 0; k < channels; ++k) {
        for (std::size_t py = 0; py < ph; ++py) {
            const auto [y0, y1] = pool_window(py, ph, rows);
            for (std::size_t px = 0; px < pw; ++px) {
                const auto [x0, x1] = pool_window(px, pw, cols);
                // First row-major maximum wins ties.
                double best = maps[k](y0, x0);
                PoolPick pick{y0, x0};
                for (std::size_t y = y0; y < y1; ++y) {
                    for (std::size_t x = x0; x < x1; ++x) {
                        if (maps[k](y, x) > best) {
                            best = maps[k](y, x);
                            pick = {y, x};
                        }
                    }
                }
                pass.pooled[idx] = best;
                pass.pool_argmax[idx] = pick;
                ++idx;
            }
        }
    }

    std::vector<double> activation = pass.pooled;
    for (std::size_t li = 0; li < model.dense.size(); ++li) {
        const DenseLayer& layer = model.dense[li];
        pass.dense_in.push_back(activation);
        std::vector<double> pre(layer.out_size, 0.0);
        for (std::size_t o = 0; o < layer.out_size; ++o) {
            double acc = layer.bias[o];
            const double* w = &layer.weights[o * layer.in_size];
            for (std::size_t i = 0; i < layer.in_size; ++i) acc += w[i] * activation[i];
            pre[o] = acc;
        }
        pass.dense_pre.push_back(pre);
        if (li + 1 < model.dense.size()) {
            for (auto& v : pre) v = v > 0.0 ? v : 0.0;
        }
        activation = std::move(pre);
    }
    pass.score = activation[0];
    return pass;
}

void conv_forward(const ConvLayer& layer, const std::vector<Matrix>& in,
                  std::vector<Matrix>& pre, std::vector<Matrix>& post) {
    const std::size_t rows = in.front().rows();
    const std::size_t cols = in.front().cols();
    pre.assign(layer.out_channels, Matrix(rows, cols));
    post.assign(layer.out_channels, Matrix(rows, cols));
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
        Matrix& out = pre[o];
        for (std::size_t y = 0; y < rows; ++y) {
            for (std::size_t x = 0; x < cols; ++x) {
                double acc = layer.bias[o];
                // Zero padding on the right/bottom edges keeps output size
                // equal to input size (MatchZoo convention).
                const std::size_t ky_max = std::min(layer.kernel_h, rows - y);
                const std::size_t kx_max = std::min(layer.kernel_w, cols - x);
                for (std::size_t i = 0; i < layer.in_channels; ++i) {
                    const Matrix& src = in[i];
                    for (std::size_t ky = 0; ky < ky_max; ++ky) {
                        for (std::size_t kx = 0; kx < kx_max; ++kx) {
                            acc += layer.weight(o, i, ky, kx) * src(y + ky, x + kx);
                        }
                    }
                }
                out(y, x) = acc;
            }
        }
        Matrix& act = post[o];
        for (std::size_t y = 0; y < rows; ++y) {
            for (std::size_t x = 0; x < cols; ++x) {
                act(y, x) = out(y, x) > 0.0 ? out(y, x) : 0.0;
            }
        }
    }
}

// Parameter gradients, same layout as the model.
struct Gradients {
    std::vector<std::vector<double>> conv_w, conv_b;
    std::vector<std::vector<double>> dense_w, dense_b;

    explicit Gradients(const RankerModel& model) {
        for (const auto& c : model.conv) {
            conv_w.emplace_back(c.weights.size(), 0.0);
            conv_b.emplace_back(c.bias.size(), 0.0);
        }
        for (const auto& d : model.dense) {
            dense_w.emplace_back(d.weights.size(), 0.0);
            dense_b.emplace_back(d.bias.size(), 0.0);
        }
    }
};

std::vector<double> dense_backward_to_input(const RankerModel& model, const ActivationCache& cache,
                                            double out_grad, Gradients* grads) {
    std::vector<double> g_pre{out_grad};
    for (std::size_t step = 0; step < model.dense.size(); ++step) {
        const std::size_t li = model.dense.size() - 1 - step;
        const DenseLayer& layer = model.dense[li];
        if (grads) {
            for (std::size_t o = 0; o < layer.out_size; ++o) {
                grads->dense_b[li][o] += g_pre[o];
                double* gw = &grads->dense_w[li][o * layer.in_size];
                const double go = g_pre[o];
                const auto& in = cache.dense_in[li];
                for (std::size_t i = 0; i < layer.in_size; ++i) gw[i] += go * in[i];
            }
        }
        std::vector<double> g_in(layer.in_size, 0.0);
        for (std::size_t o = 0; o < layer.out_size; ++o) {
            const double go = g_pre[o];
            if (go == 0.0) continue;
            const double* w = &layer.weights[o * layer.in_size];
            for (std::size_t i = 0; i < layer.in_size; ++i) g_in[i] += go * w[i];
        }
        if (li > 0) {
            // g_in is the gradient at the previous layer's post-ReLU output.
            const auto& prev_pre = cache.dense_pre[li - 1];
            for (std::size_t i = 0; i < g_in.size(); ++i) {
                if (prev_pre[i] <= 0.0) g_in[i] = 0.0;
            }
        }
        g_pre = std::move(g_in);
    }
    return g_pre;  // gradient at the pooled vector
}

std::vector<Matrix> scatter_pool_gradient(const RankerModel& model, const ActivationCache& cache,
                                          const std::vector<double>& g_pooled) {
    const std::size_t channels = model.config.conv_layers.back().out_channels;
    const std::size_t ph = model.config.pool_h;
    const std::size_t pw = model.config.pool_w;
    const auto& maps = cache.last_feature_maps();
    std::vector<Matrix> grad(channels, Matrix(maps.front().rows(), maps.front().cols()));
    std::size_t idx = 0;
    for (std::size_t k = 0; k < channels; ++k) {
        for (std::size_t cell = 0; cell < ph * pw; ++cell, ++idx) {
            const PoolPick& pick = cache.pool_argmax[idx];
            grad[k](pick.row, pick.col) += g_pooled[idx];
        }
    }
    return grad;
}

// Full backprop from the score into parameter gradients. out_grad is the
// upstream dLoss/dScore for this forward pass.
void backprop_parameters(const RankerModel& model, const ActivationCache& cache, double out_grad,
                         Gradients& grads) {
    const std::vector<double> g_pooled =
        dense_backward_to_input(model, cache, out_grad, &grads);
    std::vector<Matrix> g_post = scatter_pool_gradient(model, cache, g_pooled);

    // Layer 0 consumes the single-channel interaction matrix directly.
    const auto layer_input = [&cache](std::size_t li, std::size_t channel) -> const Matrix& {
        return li == 0 ? cache.input : cache.conv_post[li - 1][channel];
    };

    for (std::size_t step = 0; step < model.conv.size(); ++step) {
        const std::size_t li = model.conv.size() - 1 - step;
        const ConvLayer& layer = model.conv[li];
        const std::size_t rows = cache.conv_pre[li].front().rows();
        const std::size_t cols = cache.conv_pre[li].front().cols();

        std::vector<Matrix> g_prev;
        if (li > 0) g_prev.assign(layer.in_channels, Matrix(rows, cols));

        for (std::size_t o = 0; o < layer.out_channels; ++o) {
            const Matrix& pre = cache.conv_pre[li][o];
            Matrix& gp = g_post[o];
            for (std::size_t y = 0; y < rows; ++y) {
                for (std::size_t x = 0; x < cols; ++x) {
                    if (pre(y, x) <= 0.0) gp(y, x) = 0.0;
                }
            }
            double bias_acc = 0.0;
            for (std::size_t y = 0; y < rows; ++y) {
                for (std::size_t x = 0; x < cols; ++x) {
                    const double g = gp(y, x);
                    if (g == 0.0) continue;
                    bias_acc += g;
                    const std::size_t ky_max = std::min(layer.kernel_h, rows - y);
                    const std::size_t kx_max = std::min(layer.kernel_w, cols - x);
                    for (std::size_t i = 0; i < layer.in_channels; ++i) {
                        const Matrix& src = layer_input(li, i);
                        for (std::size_t ky = 0; ky < ky_max; ++ky) {
                            for (std::size_t kx = 0; kx < kx_max; ++kx) {
                                grads.conv_w[li][((o * layer.in_channels + i) * layer.kernel_h +
                                                  ky) * layer.kernel_w + kx] +=
                                    g * src(y + ky, x + kx);
                                if (li > 0) {
                                    g_prev[i](y + ky, x + kx) += g * layer.weight(o, i, ky, kx);
                                }
                            }
                        }
                    }
                }
            }
            grads.conv_b[li][o] += bias_acc;
        }
        if (li > 0) g_post = std::move(g_prev);
    }
}

void apply_gradients(RankerModel& model, const Gradients& grads, double lr) {
    for (std::size_t li = 0; li < model.conv.size(); ++li) {
        auto& layer = model.conv[li];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            layer.weights[i] -= lr * grads.conv_w[li][i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            layer.bias[i] -= lr * grads.conv_b[li][i];
        }
    }
    for (std::size_t li = 0; li < model.dense.size(); ++li) {
        auto& layer = model.dense[li];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            layer.weights[i] -= lr * grads.dense_w[li][i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            layer.bias[i] -= lr * grads.dense_b[li][i];
        }
    }
    ++model.revision;
}

}  // namespace

void validate_config(const RankerConfig& config) {
    if (config.conv_layers.empty()) {
        throw ConfigError("at least one conv layer is required");
    }
    for (const auto& spec : config.conv_layers) {
        if (spec.kernel_h == 0 || spec.kernel_w == 0 || spec.out_channels == 0) {
            throw ConfigError("conv layer dimensions must be positive");
        }
    }
    if (config.pool_h == 0 || config.pool_w == 0) {
        throw ConfigError("pool output dimensions must be positive");
    }
    for (std::size_t width : config.mlp_hidden) {
        if (width == 0) throw ConfigError("mlp hidden widths must be positive");
    }
}

RankerModel init_model(const RankerConfig& config) {
    validate_config(config);
    RankerModel model;
    model.config = config;
    Rng rng(config.seed);

    std::size_t in_channels = 1;
    for (const auto& spec : config.conv_layers) {
        ConvLayer layer;
        layer.in_channels = in_channels;
        layer.out_channels = spec.out_channels;
        layer.kernel_h = spec.kernel_h;
        layer.kernel_w = spec.kernel_w;
        const std::size_t fan_in = in_channels * spec.kernel_h * spec.kernel_w;
        const std::size_t fan_out = spec.out_channels * spec.kernel_h * spec.kernel_w;
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        layer.weights.resize(spec.out_channels * fan_in);
        for (auto& w : layer.weights) w = rng.uniform(-s, s);
        layer.bias.assign(spec.out_channels, 0.0);
        model.conv.push_back(std::move(layer));
        in_channels = spec.out_channels;
    }

    std::size_t in_size = in_channels * config.pool_h * config.pool_w;
    std::vector<std::size_t> widths = config.mlp_hidden;
    widths.push_back(1);
    for (std::size_t width : widths) {
        DenseLayer layer;
        layer.in_size = in_size;
        layer.out_size = width;
        const double s = std::sqrt(6.0 / static_cast<double>(in_size + width));
        layer.weights.resize(width * in_size);
        for (auto& w : layer.weights) w = rng.uniform(-s, s);
        layer.bias.assign(width, 0.0);
        model.dense.push_back(std::move(layer));
        in_size = width;
    }
    return model;
}

std::size_t parameter_count(const RankerModel& model) {
    std::size_t n = 0;
    for (const auto& c : model.conv) n += c.weights.size() + c.bias.size();
    for (const auto& d : model.dense) n += d.weights.size() + d.bias.size();
    return n;
}

std::pair<double, ActivationCache> forward(const RankerModel& model, const Matrix& interaction) {
    const auto& first = model.config.conv_layers.front();
    if (interaction.rows() < first.kernel_h || interaction.cols() < first.kernel_w) {
        throw ShapeError("interaction matrix " + std::to_string(interaction.rows()) + "x" +
                         std::to_string(interaction.cols()) + " is smaller than the first kernel " +
                         std::to_string(first.kernel_h) + "x" + std::to_string(first.kernel_w));
    }

    ActivationCache cache;
    cache.model_revision = model.revision;
    cache.input_rows = interaction.rows();
    cache.input_cols = interaction.cols();
    cache.input = interaction;
    cache.conv_pre.resize(model.conv.size());
    cache.conv_post.resize(model.conv.size());

    std::vector<Matrix> current{interaction};
    for (std::size_t li = 0; li < model.conv.size(); ++li) {
        conv_forward(model.conv[li], current, cache.conv_pre[li], cache.conv_post[li]);
        current = cache.conv_post[li];
    }

    HeadPass head = run_head(model, cache.conv_post.back());
    cache.pool_argmax = std::move(head.pool_argmax);
    cache.pooled = std::move(head.pooled);
    cache.dense_in = std::move(head.dense_in);
    cache.dense_pre = std::move(head.dense_pre);
    cache.score = head.score;
    return {cache.score, std::move(cache)};
}

double score(const RankerModel& model, const Matrix& interaction) {
    return forward(model, interaction).first;
}

double score_from_feature_maps(const RankerModel& model, const std::vector<Matrix>& maps) {
    return run_head(model, maps).score;
}

std::vector<Matrix> backward_to_feature_maps(const RankerModel& model,
                                             const ActivationCache& cache) {
    if (cache.model_revision != model.revision) {
        throw StaleCacheError("cache was built at model revision " +
                              std::to_string(cache.model_revision) + ", model is now at " +
                              std::to_string(model.revision));
    }
    if (cache.conv_post.size() != model.conv.size() ||
        cache.dense_pre.size() != model.dense.size()) {
        throw StaleCacheError("cache does not match the model architecture");
    }
    const std::vector<double> g_pooled = dense_backward_to_input(model, cache, 1.0, nullptr);
    return scatter_pool_gradient(model, cache, g_pooled);
}

std::vector<EpochStats> train(RankerModel& model, const RankingDataset& data,
                              const EmbeddingTable& embeddings, const TrainOptions& options) {
    for (const auto& record : data.records) {
        if (record.negatives.empty()) {
            throw ConfigError("record '" + record.id + "' has no negative documents");
        }
    }
    std::vector<EpochStats> history;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        EpochStats stats;
        stats.epoch = epoch;
        double loss_sum = 0.0;
        for (const auto& record : data.records) {
            for (const auto& negative : record.negatives) {
                const Matrix m_pos = build_interaction_matrix(record.query, record.positive,
                                                              embeddings);
                const Matrix m_neg = build_interaction_matrix(record.query, negative, embeddings);
                auto [s_pos, cache_pos] = forward(model, m_pos);
                auto [s_neg, cache_neg] = forward(model, m_neg);
                const double raw = options.margin - s_pos + s_neg;
                // max(0, NaN) would silently yield 0, so check the scores too.
                if (!std::isfinite(s_pos) || !std::isfinite(s_neg) || std::isnan(raw)) {
                    throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                          ", record '" + record.id + "'");
                }
                const double loss = std::max(0.0, raw);
                loss_sum += loss;
                ++stats.triples;
                if (loss > 0.0) {
                    ++stats.active_triples;
                    Gradients grads(model);
                    backprop_parameters(model, cache_pos, -1.0, grads);
                    backprop_parameters(model, cache_neg, 1.0, grads);
                    apply_gradients(model, grads, options.lr);
                }
            }
        }
        stats.mean_loss = stats.triples ? loss_sum / static_cast<double>(stats.triples) : 0.0;
        history.push_back(stats);
    }
    return history;
}

double pairwise_accuracy(const RankerModel& model, const RankingDataset& data,
                         const EmbeddingTable& embeddings) {
    std::size_t correct = 0, total = 0;
    for (const auto& record : data.records) {
        const double s_pos =
            score(model, build_interaction_matrix(record.query, record.positive, embeddings));
        for (const auto& negative : record.negatives) {
            const double s_neg =
                score(model, build_interaction_matrix(record.query, negative, embeddings));
            if (s_pos > s_neg) ++correct;
            ++total;
        }
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

namespace {

constexpr char kMagic[4] = {'G', 'R', 'N', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

nlohmann::json config_to_json(const RankerConfig& config) {
    nlohmann::json j;
    j["conv_layers"] = nlohmann::json::array();
    for (const auto& spec : config.conv_layers) {
        j["conv_layers"].push_back({spec.kernel_h, spec.kernel_w, spec.out_channels});
    }
    j["pool_out"] = {config.pool_h, config.pool_w};
    j["mlp_hidden"] = config.mlp_hidden;
    j["seed"] = config.seed;
    return j;
}

RankerConfig config_from_json(const nlohmann::json& j) {
    RankerConfig config;
    try {
        config.conv_layers.clear();
        for (const auto& spec : j.at("conv_layers")) {
            config.conv_layers.push_back(
                {spec.at(0).get<std::size_t>(), spec.at(1).get<std::size_t>(),
                 spec.at(2).get<std::size_t>()});
        }
        config.pool_h = j.at("pool_out").at(0).get<std::size_t>();
        config.pool_w = j.at("pool_out").at(1).get<std::size_t>();
        config.mlp_hidden = j.at("mlp_hidden").get<std::vector<std::size_t>>();
        config.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid model config: ") + e.what());
    }
    return config;
}

void write_f64(std::ofstream& out, const std::vector<double>& values) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void read_f64(std::ifstream& in, std::vector<double>& values) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw FormatError("model file truncated in parameter block");
}

}  // namespace

void save_model(const RankerModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open model file " + path.string() + " for writing");

    out.write(kMagic, 4);
    const std::uint32_t version = kFormatVersion;
    out.write(reinterpret_cast<const char*>(&version), 4);

    const std::string config = config_to_json(model.config).dump();
    const std::uint32_t config_len = static_cast<std::uint32_t>(config.size());
    out.write(reinterpret_cast<const char*>(&config_len), 4);
    out.write(config.data(), static_cast<std::streamsize>(config.size()));

    for (const auto& layer : model.conv) {
        write_f64(out, layer.weights);
        write_f64(out, layer.bias);
    }
    for (const auto& layer : model.dense) {
        write_f64(out, layer.weights);
        write_f64(out, layer.bias);
    }
    if (!out) throw FormatError("failed writing model file " + path.string());
}

RankerModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file " + path.string());

    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("bad magic bytes in " + path.string());
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (!in) throw FormatError("model file truncated in header");
    if (version != kFormatVersion) {
        throw FormatError("unsupported model format version " + std::to_string(version));
    }
    std::uint32_t config_len = 0;
    in.read(reinterpret_cast<char*>(&config_len), 4);
    if (!in) throw FormatError("model file truncated in header");
    if (config_len > (1u << 24)) throw FormatError("implausible config length in header");
    std::string config_text(config_len, '\0');
    in.read(config_text.data(), config_len);
    if (!in) throw FormatError("model file truncated in config block");

    nlohmann::json j = nlohmann::json::parse(config_text, nullptr, false);
    if (j.is_discarded()) throw FormatError("model config is not valid JSON");
    const RankerConfig config = config_from_json(j);

    // Rebuild the parameter layout from the config, then fill from the file.
    RankerModel model = init_model(config);
    for (auto& layer : model.conv) {
        read_f64(in, layer.weights);
        read_f64(in, layer.bias);
    }
    for (auto& layer : model.dense) {
        read_f64(in, layer.weights);
        read_f64(in, layer.bias);
    }
    in.peek();
    if (!in.eof()) throw FormatError("trailing data in model file " + path.string());
    model.revision = 0;
    return model;
}

}  // namespace gradrank
