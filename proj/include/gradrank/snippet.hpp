#pragma once

#include <vector>

#include "gradrank/text.hpp"

namespace gradrank {

/// Document window [start, end) with the generator's objective value and the
/// covered tokens.
struct SnippetSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    double score = 0.0;
    std::vector<std::string> tokens;

    friend bool operator==(const SnippetSpan&, const SnippetSpan&) = default;
};

/// Window of width `window` maximizing the count of exact query-token
/// matches; leftmost window wins ties. Documents no longer than the window
/// are returned whole.
SnippetSpan vanilla_snippet(const TokenSequence& query, const TokenSequence& doc,
                            std::size_t window);

/// Same search over per-term weights b_j + contribution[j] / window, where
/// b_j is the exact-match indicator. Reduces to vanilla_snippet when all
/// contributions are zero.
SnippetSpan gradcam_snippet(const TokenSequence& query, const TokenSequence& doc,
                            const std::vector<double>& contribution, std::size_t window);

}  // namespace gradrank
