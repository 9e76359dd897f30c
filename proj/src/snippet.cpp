#include "gradrank/snippet.hpp"

#include <unordered_set>

namespace gradrank {

namespace {

// Argmax window with leftmost tie-breaking. Window sums are recomputed from
// scratch (no rolling update) so the result is bit-identical to an
// exhaustive scan, ties included.
SnippetSpan best_window(const TokenSequence& doc, const std::vector<double>& weights,
                        std::size_t window) {
    SnippetSpan span;
    if (doc.size() <= window) {
        span.start = 0;
        span.end = doc.size();
        double total = 0.0;
        for (double w : weights) total += w;
        span.score = total;
    } else {
        double best = 0.0;
        std::size_t best_start = 0;
        bool have_best = false;
        for (std::size_t s = 0; s + window <= doc.size(); ++s) {
            double sum = 0.0;
            for (std::size_t j = s; j < s + window; ++j) sum += weights[j];
            if (!have_best || sum > best) {
                best = sum;
                best_start = s;
                have_best = true;
            }
        }
        span.start = best_start;
        span.end = best_start + window;
        span.score = best;
    }
    span.tokens.assign(doc.begin() + static_cast<std::ptrdiff_t>(span.start),
                       doc.begin() + static_cast<std::ptrdiff_t>(span.end));
    return span;
}

std::vector<double> match_indicators(const TokenSequence& query, const TokenSequence& doc) {
    std::unordered_set<std::string> terms(query.begin(), query.end());
    std::vector<double> b(doc.size(), 0.0);
    for (std::size_t j = 0; j < doc.size(); ++j) {
        if (terms.count(doc[j])) b[j] = 1.0;
    }
    return b;
}

void check_preconditions(const TokenSequence& doc, std::size_t window) {
    if (doc.empty()) throw EmptyInput("document has no tokens");
    if (window == 0) throw ConfigError("window size must be >= 1");
}

}  // namespace

SnippetSpan vanilla_snippet(const TokenSequence& query, const TokenSequence& doc,
                            std::size_t window) {
    check_preconditions(doc, window);
    return best_window(doc, match_indicators(query, doc), window);
}

SnippetSpan gradcam_snippet(const TokenSequence& query, const TokenSequence& doc,
                            const std::vector<double>& contribution, std::size_t window) {
    check_preconditions(doc, window);
    if (contribution.size() != doc.size()) {
        throw ShapeError("contribution length " + std::to_string(contribution.size()) +
                         " does not match document length " + std::to_string(doc.size()));
    }
    std::vector<double> weights = match_indicators(query, doc);
    const double w = static_cast<double>(window);
    for (std::size_t j = 0; j < doc.size(); ++j) weights[j] += contribution[j] / w;
    return best_window(doc, weights, window);
}

}  // namespace gradrank
