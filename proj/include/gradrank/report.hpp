#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gradrank/matrix.hpp"
#include "gradrank/snippet.hpp"
#include "gradrank/stats.hpp"

namespace gradrank {

struct ExplainOptions {
    std::size_t top_k = 5;
    double q_sim = 80.0;      // similarity percentile for filtered terms
    double q_contrib = 40.0;  // contribution percentile for filtered terms
    std::size_t window = 20;  // snippet window
};

struct TermEntry {
    std::size_t position = 0;
    std::string token;
    double contribution = 0.0;  // column sum of the localization map
    double similarity = 0.0;    // column sum of the interaction matrix

    friend bool operator==(const TermEntry&, const TermEntry&) = default;
};

// Full per-document explanation bundle. `interaction` stays in memory for
// heatmap rendering; the JSON payload carries the localization map and the
// flattened arrays.
struct ExplanationReport {
    std::vector<std::string> query;
    std::vector<std::string> doc;
    double score = 0.0;
    Matrix interaction;
    Matrix localization;                  // upsampled, non-negative
    std::vector<double> contributions;    // column sums of localization
    std::vector<double> similarities;     // column sums of interaction
    std::vector<TermEntry> effective;
    std::vector<TermEntry> filtered;
    SnippetSpan snippet_vanilla;
    SnippetSpan snippet_gradcam;
    std::optional<double> kurtosis;       // empty for a constant map
    double total = 0.0;
};

/// Deterministic JSON: fixed key order, floats at 9 significant digits.
/// serialize(parse(serialize(r))) == serialize(r) byte for byte.
std::string report_to_json(const ExplanationReport& report);

/// Parses report_to_json output. Throws FormatError on schema violations.
/// The in-memory-only interaction matrix is left empty.
ExplanationReport report_from_json(const std::string& text);

/// Corpus analysis JSON (rows, per-measure test blocks with group summaries,
/// failures). Same determinism contract as report_to_json.
std::string corpus_analysis_to_json(const CorpusAnalysis& analysis);

/// JSON object comparing the two snippet generators' spans.
std::string snippet_pair_to_json(const SnippetSpan& vanilla, const SnippetSpan& gradcam);

/// Binary PPM (P6) heatmap: values min-max mapped onto a linear
/// blue (0,0,255) -> red (255,0,0) ramp, each matrix cell drawn as a
/// cell_px x cell_px block. Constant maps render all blue.
void write_ppm_heatmap(const Matrix& map, const std::filesystem::path& path,
                       std::size_t cell_px = 16);

}  // namespace gradrank
