#include "gradrank/gradcam.hpp"

#include <algorithm>
#include <cmath>

#include "gradrank/interaction.hpp"
#include "gradrank/snippet.hpp"
#include "gradrank/stats.hpp"
#include "gradrank/term_analysis.hpp"

namespace gradrank {

std::vector<double> importance_weights(const std::vector<Matrix>& gradient_maps) {
    if (gradient_maps.empty()) throw ShapeError("no gradient maps");
    const Matrix& first = gradient_maps.front();
    if (first.empty()) throw ShapeError("gradient maps have no elements");
    std::vector<double> alpha(gradient_maps.size(), 0.0);
    const double z = static_cast<double>(first.size());
    for (std::size_t k = 0; k < gradient_maps.size(); ++k) {
        if (!gradient_maps[k].same_shape(first)) {
            throw ShapeError("gradient maps differ in shape");
        }
        double sum = 0.0;
        for (double v : gradient_maps[k].values()) sum += v;
        alpha[k] = sum / z;
    }
    return alpha;
}

Matrix localization_map(const std::vector<double>& alpha, const std::vector<Matrix>& maps) {
    if (maps.empty() || maps.front().empty()) throw ShapeError("no feature maps");
    if (alpha.size() != maps.size()) {
        throw ShapeError("got " + std::to_string(alpha.size()) + " weights for " +
                         std::to_string(maps.size()) + " feature maps");
    }
    const Matrix& first = maps.front();
    Matrix combined(first.rows(), first.cols());
    for (std::size_t k = 0; k < maps.size(); ++k) {
        if (!maps[k].same_shape(first)) throw ShapeError("feature maps differ in shape");
        const auto& src = maps[k].values();
        auto& dst = combined.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha[k] * src[i];
    }
    for (auto& v : combined.values()) v = v > 0.0 ? v : 0.0;
    return combined;
}

Matrix bilinear_upsample(const Matrix& source, std::size_t target_rows,
                         std::size_t target_cols) {
    if (source.empty()) throw EmptyInput("source map has no elements");
    if (target_rows < source.rows() || target_cols < source.cols()) {
        throw ShapeError("target " + std::to_string(target_rows) + "x" +
                         std::to_string(target_cols) + " is smaller than source " +
                         std::to_string(source.rows()) + "x" + std::to_string(source.cols()));
    }

    const std::size_t su = source.rows(), sv = source.cols();
    Matrix out(target_rows, target_cols);
    for (std::size_t i = 0; i < target_rows; ++i) {
        const double sy = (su == 1 || target_rows == 1)
                              ? 0.0
                              : static_cast<double>(i) * (static_cast<double>(su) - 1.0) /
                                    (static_cast<double>(target_rows) - 1.0);
        const std::size_t y0 = std::min(static_cast<std::size_t>(sy), su - 1);
        const std::size_t y1 = std::min(y0 + 1, su - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t j = 0; j < target_cols; ++j) {
            const double sx = (sv == 1 || target_cols == 1)
                                  ? 0.0
                                  : static_cast<double>(j) * (static_cast<double>(sv) - 1.0) /
                                        (static_cast<double>(target_cols) - 1.0);
            const std::size_t x0 = std::min(static_cast<std::size_t>(sx), sv - 1);
            const std::size_t x1 = std::min(x0 + 1, sv - 1);
            const double fx = sx - static_cast<double>(x0);

            const double v00 = source(y0, x0), v01 = source(y0, x1);
            const double v10 = source(y1, x0), v11 = source(y1, x1);
            double value = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                           fy * ((1.0 - fx) * v10 + fx * v11);
            // Clamp to the corner envelope so convex-combination bounds hold
            // exactly despite rounding.
            const double lo = std::min(std::min(v00, v01), std::min(v10, v11));
            const double hi = std::max(std::max(v00, v01), std::max(v10, v11));
            if (value < lo) value = lo;
            if (value > hi) value = hi;
            out(i, j) = value;
        }
    }
    return out;
}

ScoredLocalization localize(const RankerModel& model, const TokenSequence& query,
                            const TokenSequence& doc, const EmbeddingTable& embeddings) {
    ScoredLocalization result;
    result.interaction = build_interaction_matrix(query, doc, embeddings);
    auto [s, cache] = forward(model, result.interaction);
    result.score = s;
    const std::vector<Matrix> grads = backward_to_feature_maps(model, cache);
    const std::vector<double> alpha = importance_weights(grads);
    result.raw = localization_map(alpha, cache.last_feature_maps());
    result.upsampled =
        bilinear_upsample(result.raw, result.interaction.rows(), result.interaction.cols());
    return result;
}

ExplanationReport explain(const RankerModel& model, const TokenSequence& query,
                          const TokenSequence& doc, const EmbeddingTable& embeddings,
                          const ExplainOptions& options) {
    ScoredLocalization scored = localize(model, query, doc, embeddings);

    ExplanationReport report;
    report.query = query;
    report.doc = doc;
    report.score = scored.score;
    report.contributions = flatten_columns(scored.upsampled);
    report.similarities = flatten_columns(scored.interaction);

    const auto make_entry = [&](std::size_t pos) {
        return TermEntry{pos, doc[pos], report.contributions[pos], report.similarities[pos]};
    };
    for (std::size_t pos : effective_terms(report.contributions, doc, options.top_k)) {
        report.effective.push_back(make_entry(pos));
    }
    // Filtered terms never repeat an effective token (report invariant).
    std::vector<std::string> taken;
    for (const auto& e : report.effective) taken.push_back(e.token);
    for (std::size_t pos : filtered_terms(report.contributions, report.similarities, doc,
                                          options.q_sim, options.q_contrib)) {
        if (std::find(taken.begin(), taken.end(), doc[pos]) == taken.end()) {
            report.filtered.push_back(make_entry(pos));
        }
    }

    report.snippet_vanilla = vanilla_snippet(query, doc, options.window);
    report.snippet_gradcam = gradcam_snippet(query, doc, report.contributions, options.window);

    try {
        report.kurtosis = kurtosis(scored.upsampled);
    } catch (const DegenerateMap&) {
        report.kurtosis.reset();
    }
    report.total = map_total(scored.upsampled);

    report.interaction = std::move(scored.interaction);
    report.localization = std::move(scored.upsampled);
    return report;
}

}  // namespace gradrank
