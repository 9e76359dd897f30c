#pragma once

#include <vector>

#include "gradrank/matrix.hpp"
#include "gradrank/text.hpp"

namespace gradrank {

/// Cosine similarity; 0 by convention when either vector has zero norm.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Interaction matrix M with M(i, j) = cosine(emb(query[i]), emb(doc[j])).
/// Throws EmptyInput when either sequence is empty.
Matrix build_interaction_matrix(const TokenSequence& query, const TokenSequence& doc,
                                const EmbeddingTable& embeddings);

/// Column sums: out[j] = sum_i matrix(i, j). Throws EmptyInput on an empty
/// matrix.
std::vector<double> flatten_columns(const Matrix& matrix);

}  // namespace gradrank
