#include "gradrank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "gradrank/gradcam.hpp"
#include "gradrank/interaction.hpp"
#include "gradrank/parallel.hpp"
#include "gradrank/rng.hpp"
#include "gradrank/term_analysis.hpp"

namespace gradrank {

double kurtosis(const std::vector<double>& values) {
    if (values.size() < 2) throw DegenerateMap("kurtosis needs at least two elements");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) {
        const double d = v - mean;
        var += d * d;
    }
    var /= n;
    if (var == 0.0) throw DegenerateMap("constant map has undefined kurtosis");
    double fourth = 0.0;
    for (double v : values) {
        const double d = v - mean;
        fourth += d * d * d * d;
    }
    fourth /= n;
    return fourth / (var * var);
}

double kurtosis(const Matrix& map) { return kurtosis(map.values()); }

double map_total(const Matrix& map) {
    double total = 0.0;
    for (double v : map.values()) total += v;
    return total;
}

namespace {

double normal_sf(double z) {
    // P(Z >= z) for a standard normal.
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw EmptyInput("mann_whitney_u requires non-empty samples");

    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    // #{(x, y) : x > y} and #{x = y} by a merge sweep; identical to the
    // naive pair count.
    unsigned long long greater = 0, equal = 0;
    std::size_t below = 0;
    for (const double x : sa) {
        while (below < sb.size() && sb[below] < x) ++below;
        greater += below;
        std::size_t eq = below;
        while (eq < sb.size() && sb[eq] == x) ++eq;
        equal += eq - below;
    }

    MannWhitneyResult result;
    result.n_a = a.size();
    result.n_b = b.size();
    result.u_a = static_cast<double>(greater) + 0.5 * static_cast<double>(equal);

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double total = na + nb;
    const double mean_u = na * nb / 2.0;

    // Tie correction over the pooled sample.
    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    pooled.insert(pooled.end(), sa.begin(), sa.end());
    pooled.insert(pooled.end(), sb.begin(), sb.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i + 1;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        if (j - i > 1) tie_term += t * t * t - t;
        i = j;
    }

    const double variance =
        (na * nb / 12.0) * ((total + 1.0) - tie_term / (total * (total - 1.0)));

    if (result.u_a > mean_u) {
        result.direction = Direction::a_greater;
    } else if (result.u_a < mean_u) {
        result.direction = Direction::b_greater;
    } else {
        result.direction = Direction::tied;
    }

    if (variance <= 0.0) {
        // Every pooled value tied: U sits exactly at its null mean.
        result.p_value = 0.5;
        result.direction = Direction::tied;
        return result;
    }
    const double z = (result.u_a - mean_u - 0.5) / std::sqrt(variance);
    result.p_value = normal_sf(z);
    return result;
}

namespace {

GroupSummary summarize(const std::vector<double>& values) {
    GroupSummary s;
    if (values.empty()) return s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.q1 = percentile(values, 25.0);
    s.median = percentile(values, 50.0);
    s.q3 = percentile(values, 75.0);
    return s;
}

MeasureTest run_measure_test(const std::string& name, const std::vector<double>& pos,
                             const std::vector<double>& neg, std::size_t excluded) {
    MeasureTest test;
    test.measure = name;
    test.n_pos = pos.size();
    test.n_neg = neg.size();
    test.excluded_count = excluded;
    test.positive_summary = summarize(pos);
    test.negative_summary = summarize(neg);
    if (!pos.empty() && !neg.empty()) {
        const MannWhitneyResult mw = mann_whitney_u(pos, neg);
        test.u_statistic = mw.u_a;
        test.p_value = mw.p_value;
        test.direction = mw.direction;
    }
    return test;
}

}  // namespace

CorpusAnalysis corpus_analysis(const RankerModel& model, const RankingDataset& data,
                               const EmbeddingTable& embeddings) {
    struct DocTask {
        const RankingRecord* record;
        const TokenSequence* doc;
        std::string doc_id;
        bool positive;
    };
    std::vector<DocTask> tasks;
    for (const auto& record : data.records) {
        tasks.push_back({&record, &record.positive, record.id + "#pos", true});
        for (std::size_t i = 0; i < record.negatives.size(); ++i) {
            tasks.push_back(
                {&record, &record.negatives[i], record.id + "#neg" + std::to_string(i), false});
        }
    }

    struct DocOutcome {
        bool failed = false;
        std::string error;
        MapStatistics stats;
    };
    std::vector<DocOutcome> outcomes(tasks.size());

    parallel_for(tasks.size(), [&](std::size_t i) {
        const DocTask& task = tasks[i];
        DocOutcome& out = outcomes[i];
        try {
            const ScoredLocalization scored =
                localize(model, task.record->query, *task.doc, embeddings);
            out.stats.doc_id = task.doc_id;
            out.stats.positive = task.positive;
            out.stats.score = scored.score;
            out.stats.total = map_total(scored.upsampled);
            try {
                out.stats.kurtosis = kurtosis(scored.upsampled);
            } catch (const DegenerateMap&) {
                out.stats.kurtosis.reset();
            }
        } catch (const Error& e) {
            out.failed = true;
            out.error = e.what();
        } catch (const std::exception& e) {
            out.failed = true;
            out.error = e.what();
        }
    });

    CorpusAnalysis analysis;
    std::vector<double> kurt_pos, kurt_neg, total_pos, total_neg;
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].failed) {
            analysis.failures.push_back({tasks[i].doc_id, outcomes[i].error});
            continue;
        }
        const MapStatistics& stats = outcomes[i].stats;
        analysis.rows.push_back(stats);
        if (stats.kurtosis.has_value()) {
            (stats.positive ? kurt_pos : kurt_neg).push_back(*stats.kurtosis);
        } else {
            ++degenerate;
        }
        (stats.positive ? total_pos : total_neg).push_back(stats.total);
    }

    analysis.kurtosis_test = run_measure_test("kurtosis", kurt_pos, kurt_neg, degenerate);
    analysis.total_test = run_measure_test("total", total_pos, total_neg, 0);
    return analysis;
}

namespace {

std::string random_token(Rng& rng, std::unordered_set<std::string>& used) {
    while (true) {
        const std::size_t len = rng.between(3, 8);
        std::string token;
        for (std::size_t i = 0; i < len; ++i) {
            token.push_back(static_cast<char>('a' + rng.below(26)));
        }
        if (used.insert(token).second) return token;
    }
}

// Unit vector within cosine >= 0.8 of base: normalize(base + b * r) with r
// orthogonal to base and b in [0.2, 0.5] gives cosine 1/sqrt(1+b^2) in
// [0.894, 0.981].
std::vector<double> near_synonym_vector(Rng& rng, const std::vector<double>& base) {
    const std::size_t dim = base.size();
    std::vector<double> r = rng.unit_vector(dim);
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += r[i] * base[i];
    for (std::size_t i = 0; i < dim; ++i) r[i] -= dot * base[i];
    double norm = 0.0;
    for (double v : r) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-9) return base;
    const double b = rng.uniform(0.2, 0.5);
    std::vector<double> out(dim);
    double out_norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        out[i] = base[i] + b * r[i] / norm;
        out_norm += out[i] * out[i];
    }
    out_norm = std::sqrt(out_norm);
    for (auto& v : out) v /= out_norm;
    return out;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(std::size_t n_queries, std::size_t vocab_size,
                                          std::uint64_t seed) {
    if (vocab_size < 20) throw ConfigError("vocab_size must be >= 20");
    constexpr std::size_t kDim = 16;
    constexpr std::size_t kNegativesPerQuery = 4;

    Rng rng(seed);
    std::unordered_set<std::string> used;

    // Disjoint pools: query terms, their synonyms (two each), negative-only
    // filler. The query pool never drops below 6 so 3-6 token queries are
    // always possible.
    const std::size_t n_query_pool = std::max<std::size_t>(6, vocab_size / 5);
    const std::size_t n_syn = 2 * n_query_pool;
    const std::size_t n_neg_pool = vocab_size - n_query_pool - n_syn;

    std::vector<std::string> query_pool, neg_pool;
    std::vector<std::vector<std::string>> synonyms(n_query_pool);

    Rng oov_rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<double> oov(kDim);
    for (auto& x : oov) x = oov_rng.uniform(-0.1, 0.1);
    EmbeddingTable table(kDim, std::move(oov));

    for (std::size_t i = 0; i < n_query_pool; ++i) {
        const std::string token = random_token(rng, used);
        const std::vector<double> vec = rng.unit_vector(kDim);
        table.insert(token, vec);
        query_pool.push_back(token);
        for (std::size_t s = 0; s < 2; ++s) {
            const std::string syn = random_token(rng, used);
            table.insert(syn, near_synonym_vector(rng, vec));
            synonyms[i].push_back(syn);
        }
    }
    for (std::size_t i = 0; i < n_neg_pool; ++i) {
        const std::string token = random_token(rng, used);
        table.insert(token, rng.unit_vector(kDim));
        neg_pool.push_back(token);
    }

    RankingDataset dataset;
    for (std::size_t q = 0; q < n_queries; ++q) {
        RankingRecord record;
        record.id = "q" + std::to_string(q);

        const std::size_t query_len = rng.between(3, 6);
        std::vector<std::size_t> picks;
        while (picks.size() < std::min(query_len, query_pool.size())) {
            const std::size_t cand = rng.below(query_pool.size());
            if (std::find(picks.begin(), picks.end(), cand) == picks.end()) {
                picks.push_back(cand);
            }
        }
        for (std::size_t p : picks) record.query.push_back(query_pool[p]);

        // Positive: exact query tokens plus their synonyms, shuffled and
        // repeated to a target length.
        std::vector<std::string> positive_stock;
        positive_stock.push_back(query_pool[picks[rng.below(picks.size())]]);  // guaranteed match
        for (std::size_t p : picks) {
            if (rng.uniform01() < 0.8) positive_stock.push_back(query_pool[p]);
            for (const auto& syn : synonyms[p]) {
                if (rng.uniform01() < 0.7) positive_stock.push_back(syn);
            }
        }
        const std::size_t pos_len = rng.between(12, 24);
        while (record.positive.size() < pos_len) {
            record.positive.push_back(positive_stock[rng.below(positive_stock.size())]);
        }
        rng.shuffle(record.positive);

        for (std::size_t n = 0; n < kNegativesPerQuery; ++n) {
            TokenSequence negative;
            const std::size_t neg_len = rng.between(12, 24);
            for (std::size_t t = 0; t < neg_len; ++t) {
                negative.push_back(neg_pool[rng.below(neg_pool.size())]);
            }
            record.negatives.push_back(std::move(negative));
        }
        dataset.records.push_back(std::move(record));
    }
    return {std::move(dataset), std::move(table)};
}

}  // namespace gradrank
