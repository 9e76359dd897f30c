#include "gradrank/interaction.hpp"

#include <cmath>

namespace gradrank {

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Matrix build_interaction_matrix(const TokenSequence& query, const TokenSequence& doc,
                                const EmbeddingTable& embeddings) {
    if (query.empty()) throw EmptyInput("query has no tokens");
    if (doc.empty()) throw EmptyInput("document has no tokens");

    // Vectors and norms are gathered once per token position.
    std::vector<const std::vector<double>*> q_vecs(query.size()), d_vecs(doc.size());
    std::vector<double> q_norm(query.size()), d_norm(doc.size());
    auto norm_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    for (std::size_t i = 0; i < query.size(); ++i) {
        q_vecs[i] = &embeddings.lookup(query[i]);
        q_norm[i] = norm_of(*q_vecs[i]);
    }
    for (std::size_t j = 0; j < doc.size(); ++j) {
        d_vecs[j] = &embeddings.lookup(doc[j]);
        d_norm[j] = norm_of(*d_vecs[j]);
    }

    Matrix m(query.size(), doc.size());
    for (std::size_t i = 0; i < query.size(); ++i) {
        for (std::size_t j = 0; j < doc.size(); ++j) {
            if (q_norm[i] == 0.0 || d_norm[j] == 0.0) {
                m(i, j) = 0.0;
                continue;
            }
            double dot = 0.0;
            const auto& qa = *q_vecs[i];
            const auto& db = *d_vecs[j];
            for (std::size_t k = 0; k < qa.size(); ++k) dot += qa[k] * db[k];
            m(i, j) = dot / (q_norm[i] * d_norm[j]);
        }
    }
    return m;
}

std::vector<double> flatten_columns(const Matrix& matrix) {
    if (matrix.empty()) throw EmptyInput("matrix has no elements");
    std::vector<double> sums(matrix.cols(), 0.0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            sums[j] += matrix(i, j);
        }
    }
    return sums;
}

}  // namespace gradrank
