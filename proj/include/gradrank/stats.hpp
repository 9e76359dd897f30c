#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradrank/matrix.hpp"
#include "gradrank/ranker.hpp"
#include "gradrank/text.hpp"

namespace gradrank {

/// Population kurtosis E[((x - mu) / sigma)^4] over all elements (divide by
/// N, no bias correction). Throws DegenerateMap when sigma is zero or fewer
/// than two elements exist.
double kurtosis(const std::vector<double>& values);
double kurtosis(const Matrix& map);

/// Sum of all elements.
double map_total(const Matrix& map);

enum class Direction { a_greater, b_greater, tied };

struct MannWhitneyResult {
    double u_a = 0.0;     // #{x > y} + 0.5 * #{x = y} over a x b
    double p_value = 1.0; // one-sided, H1: a stochastically greater than b
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    Direction direction = Direction::tied;
};

/// Mann-Whitney U by exact pair counting (sorted two-pointer sweep; counts
/// equal the naive double loop exactly). p-value from the normal
/// approximation with tie-corrected variance and continuity correction.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

struct MapStatistics {
    std::string doc_id;
    bool positive = false;
    double score = 0.0;
    std::optional<double> kurtosis;  // empty when the map is constant
    double total = 0.0;
};

struct GroupSummary {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct MeasureTest {
    std::string measure;
    double u_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    Direction direction = Direction::tied;
    std::size_t excluded_count = 0;  // degenerate maps excluded from this measure
    GroupSummary positive_summary;
    GroupSummary negative_summary;
};

struct CorpusFailure {
    std::string doc_id;
    std::string error;
};

struct CorpusAnalysis {
    std::vector<MapStatistics> rows;
    MeasureTest kurtosis_test;
    MeasureTest total_test;
    std::vector<CorpusFailure> failures;
};

/// Explains every (query, positive) and (query, negative) pair, collects
/// kurtosis and map totals, and tests positive > negative one-sided for each
/// measure. Per-document failures are recorded, not fatal. Document fan-out
/// runs in parallel (capped by GRADRANK_THREADS); output order is
/// deterministic.
CorpusAnalysis corpus_analysis(const RankerModel& model, const RankingDataset& data,
                               const EmbeddingTable& embeddings);

struct SyntheticCorpus {
    RankingDataset dataset;
    EmbeddingTable embeddings;
};

/// Seeded corpus for desk-scale validation: random vocabulary with unit-norm
/// embeddings; 3-6 token queries; positives mix exact query tokens (at least
/// one guaranteed) with near-synonyms (cosine >= 0.8 to some query token);
/// negatives draw from a disjoint token pool; 4 negatives per query.
/// vocab_size must be >= 20.
SyntheticCorpus generate_synthetic_corpus(std::size_t n_queries, std::size_t vocab_size,
                                          std::uint64_t seed);

}  // namespace gradrank
