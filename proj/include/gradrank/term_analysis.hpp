#pragma once

#include <vector>

#include "gradrank/text.hpp"

namespace gradrank {

/// Min-max normalization to [0, 1]; constant input maps to all zeros.
std::vector<double> min_max_normalize(const std::vector<double>& values);

/// Percentile by linear interpolation between order statistics.
/// q in [0, 100]; values must be non-empty.
double percentile(std::vector<double> values, double q);

/// Top-k document positions by contribution, ties broken toward the lower
/// index, duplicate tokens collapsed to their highest-scoring occurrence.
/// Returned in descending contribution order.
std::vector<std::size_t> effective_terms(const std::vector<double>& contribution,
                                         const TokenSequence& doc, std::size_t k);

/// Positions whose normalized similarity is at or above its q_sim percentile
/// while their normalized contribution is at or below its q_contrib
/// percentile: terms the model discounted despite high query similarity.
/// Sorted by (normalized similarity - normalized contribution) descending;
/// duplicate tokens collapsed as in effective_terms. A constant similarity
/// array carries no signal and yields an empty list.
std::vector<std::size_t> filtered_terms(const std::vector<double>& contribution,
                                        const std::vector<double>& similarity,
                                        const TokenSequence& doc, double q_sim = 80.0,
                                        double q_contrib = 40.0);

}  // namespace gradrank
