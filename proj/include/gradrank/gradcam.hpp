#pragma once

#include <vector>

#include "gradrank/matrix.hpp"
#include "gradrank/ranker.hpp"
#include "gradrank/report.hpp"
#include "gradrank/text.hpp"

namespace gradrank {

/// Importance weight per feature map: the global average of its gradient
/// map. Throws ShapeError when the maps disagree in shape or are empty.
std::vector<double> importance_weights(const std::vector<Matrix>& gradient_maps);

/// ReLU of the alpha-weighted sum of feature maps. Throws ShapeError on a
/// length or shape mismatch.
Matrix localization_map(const std::vector<double>& alpha, const std::vector<Matrix>& maps);

/// Align-corners bilinear upsampling: target cell (i, j) samples source
/// coordinate (i*(su-1)/(tu-1), j*(sv-1)/(tv-1)); a single-row or
/// single-column axis replicates. Equal sizes reproduce the input exactly;
/// every output value stays within [min(source), max(source)]. Throws
/// ShapeError when the target is smaller than the source.
Matrix bilinear_upsample(const Matrix& source, std::size_t target_rows, std::size_t target_cols);

/// Score plus localization maps for one pair; the shared core of explain()
/// and corpus_analysis().
struct ScoredLocalization {
    double score = 0.0;
    Matrix interaction;
    Matrix raw;        // pre-upsample localization map
    Matrix upsampled;  // resized to the interaction matrix dims
};

ScoredLocalization localize(const RankerModel& model, const TokenSequence& query,
                            const TokenSequence& doc, const EmbeddingTable& embeddings);

/// Full pipeline for one query-document pair: interaction matrix, forward,
/// gradients, importance weights, localization map, upsample, flattened
/// arrays, term lists, both snippets, and map statistics.
ExplanationReport explain(const RankerModel& model, const TokenSequence& query,
                          const TokenSequence& doc, const EmbeddingTable& embeddings,
                          const ExplainOptions& options = {});

}  // namespace gradrank
