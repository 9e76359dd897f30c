#include "gradrank/term_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace gradrank {

std::vector<double> min_max_normalize(const std::vector<double>& values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return out;  // degenerate: uniform signal normalizes to zeros
    const double range = hi - lo;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
    return out;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw EmptyInput("percentile of empty sample");
    if (q < 0.0 || q > 100.0) throw ConfigError("percentile must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const double rank = (static_cast<double>(values.size()) - 1.0) * q / 100.0;
    const std::size_t lo = static_cast<std::size_t>(rank);
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

// Keep only the best occurrence of each token (highest key, then lowest
// index), preserving candidate order by (key desc, index asc).
std::vector<std::size_t> dedup_and_rank(const std::vector<std::size_t>& positions,
                                        const std::vector<double>& key,
                                        const TokenSequence& doc) {
    std::unordered_map<std::string, std::size_t> best;
    for (std::size_t pos : positions) {
        auto it = best.find(doc[pos]);
        if (it == best.end()) {
            best.emplace(doc[pos], pos);
        } else if (key[pos] > key[it->second] ||
                   (key[pos] == key[it->second] && pos < it->second)) {
            it->second = pos;
        }
    }
    std::vector<std::size_t> result;
    result.reserve(best.size());
    for (const auto& [token, pos] : best) result.push_back(pos);
    std::sort(result.begin(), result.end(), [&](std::size_t a, std::size_t b) {
        if (key[a] != key[b]) return key[a] > key[b];
        return a < b;
    });
    return result;
}

}  // namespace

std::vector<std::size_t> effective_terms(const std::vector<double>& contribution,
                                         const TokenSequence& doc, std::size_t k) {
    if (contribution.size() != doc.size()) {
        throw ShapeError("contribution length " + std::to_string(contribution.size()) +
                         " does not match document length " + std::to_string(doc.size()));
    }
    if (k == 0) throw ConfigError("k must be >= 1");

    std::vector<std::size_t> all(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) all[i] = i;
    std::vector<std::size_t> ranked = dedup_and_rank(all, contribution, doc);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

std::vector<std::size_t> filtered_terms(const std::vector<double>& contribution,
                                        const std::vector<double>& similarity,
                                        const TokenSequence& doc, double q_sim,
                                        double q_contrib) {
    if (contribution.size() != doc.size() || similarity.size() != doc.size()) {
        throw ShapeError("contribution/similarity lengths do not match document length " +
                         std::to_string(doc.size()));
    }
    if (!(0.0 < q_contrib && q_contrib < q_sim && q_sim < 100.0)) {
        throw ConfigError("percentile thresholds must satisfy 0 < q_contrib < q_sim < 100");
    }

    const std::vector<double> sim_norm = min_max_normalize(similarity);
    const std::vector<double> con_norm = min_max_normalize(contribution);

    // Constant similarity: no term is distinctively similar to the query.
    const bool sim_degenerate =
        std::all_of(sim_norm.begin(), sim_norm.end(), [](double v) { return v == 0.0; });
    if (sim_degenerate) return {};

    const double sim_threshold = percentile(sim_norm, q_sim);
    const double con_threshold = percentile(con_norm, q_contrib);

    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < doc.size(); ++j) {
        if (sim_norm[j] >= sim_threshold && con_norm[j] <= con_threshold) {
            candidates.push_back(j);
        }
    }
    std::vector<double> gap(doc.size(), 0.0);
    for (std::size_t j = 0; j < doc.size(); ++j) gap[j] = sim_norm[j] - con_norm[j];
    return dedup_and_rank(candidates, gap, doc);
}

}  // namespace gradrank
