#include "gradrank/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace gradrank {

namespace {

// Minimal JSON emitter with a pinned float format (9 significant digits,
// locale-independent via to_chars) so report bytes are reproducible across
// runs and platforms. nlohmann/json prints shortest-round-trip doubles,
// which is lossless but not the declared precision contract.
class JsonWriter {
public:
    std::string take() { return std::move(out_); }

    void raw(const char* s) { out_ += s; }

    void string(const std::string& s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    void number(double v) {
        char buf[40];
        const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                             std::chars_format::general, 9);
        out_.append(buf, end);
        (void)ec;
    }

    void integer(std::size_t v) { out_ += std::to_string(v); }

    void key(const char* name) {
        string(name);
        out_ += ':';
    }

    void comma() { out_ += ','; }

private:
    std::string out_;
};

void emit_double_array(JsonWriter& w, const std::vector<double>& values) {
    w.raw("[");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) w.comma();
        w.number(values[i]);
    }
    w.raw("]");
}

void emit_string_array(JsonWriter& w, const std::vector<std::string>& values) {
    w.raw("[");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) w.comma();
        w.string(values[i]);
    }
    w.raw("]");
}

void emit_matrix(JsonWriter& w, const Matrix& m) {
    w.raw("[");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i) w.comma();
        w.raw("[");
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) w.comma();
            w.number(m(i, j));
        }
        w.raw("]");
    }
    w.raw("]");
}

void emit_terms(JsonWriter& w, const std::vector<TermEntry>& terms) {
    w.raw("[");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) w.comma();
        w.raw("{");
        w.key("position");
        w.integer(terms[i].position);
        w.comma();
        w.key("token");
        w.string(terms[i].token);
        w.comma();
        w.key("contribution");
        w.number(terms[i].contribution);
        w.comma();
        w.key("similarity");
        w.number(terms[i].similarity);
        w.raw("}");
    }
    w.raw("]");
}

void emit_span(JsonWriter& w, const SnippetSpan& span) {
    w.raw("{");
    w.key("start");
    w.integer(span.start);
    w.comma();
    w.key("end");
    w.integer(span.end);
    w.comma();
    w.key("score");
    w.number(span.score);
    w.comma();
    w.key("tokens");
    emit_string_array(w, span.tokens);
    w.raw("}");
}

using json = nlohmann::json;

std::vector<std::string> parse_string_array(const json& j) {
    return j.get<std::vector<std::string>>();
}

Matrix parse_matrix(const json& j) {
    if (!j.is_array() || j.empty()) throw FormatError("matrix must be a non-empty array");
    const std::size_t rows = j.size();
    const std::size_t cols = j.at(0).size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) throw FormatError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

std::vector<TermEntry> parse_terms(const json& j) {
    std::vector<TermEntry> terms;
    for (const auto& t : j) {
        TermEntry entry;
        entry.position = t.at("position").get<std::size_t>();
        entry.token = t.at("token").get<std::string>();
        entry.contribution = t.at("contribution").get<double>();
        entry.similarity = t.at("similarity").get<double>();
        terms.push_back(std::move(entry));
    }
    return terms;
}

SnippetSpan parse_span(const json& j) {
    SnippetSpan span;
    span.start = j.at("start").get<std::size_t>();
    span.end = j.at("end").get<std::size_t>();
    span.score = j.at("score").get<double>();
    span.tokens = parse_string_array(j.at("tokens"));
    return span;
}

const char* direction_name(Direction d) {
    switch (d) {
        case Direction::a_greater: return "positive";
        case Direction::b_greater: return "negative";
        default: return "tied";
    }
}

void emit_summary(JsonWriter& w, const GroupSummary& s) {
    w.raw("{");
    w.key("min");
    w.number(s.min);
    w.comma();
    w.key("q1");
    w.number(s.q1);
    w.comma();
    w.key("median");
    w.number(s.median);
    w.comma();
    w.key("q3");
    w.number(s.q3);
    w.comma();
    w.key("max");
    w.number(s.max);
    w.raw("}");
}

void emit_measure_test(JsonWriter& w, const MeasureTest& t) {
    w.raw("{");
    w.key("measure");
    w.string(t.measure);
    w.comma();
    w.key("u");
    w.number(t.u_statistic);
    w.comma();
    w.key("p");
    w.number(t.p_value);
    w.comma();
    w.key("n_pos");
    w.integer(t.n_pos);
    w.comma();
    w.key("n_neg");
    w.integer(t.n_neg);
    w.comma();
    w.key("direction");
    w.string(direction_name(t.direction));
    w.comma();
    w.key("excluded_count");
    w.integer(t.excluded_count);
    w.comma();
    w.key("positive_summary");
    emit_summary(w, t.positive_summary);
    w.comma();
    w.key("negative_summary");
    emit_summary(w, t.negative_summary);
    w.raw("}");
}

}  // namespace

std::string report_to_json(const ExplanationReport& report) {
    JsonWriter w;
    w.raw("{");
    w.key("schema_version");
    w.integer(1);
    w.comma();
    w.key("query");
    emit_string_array(w, report.query);
    w.comma();
    w.key("doc");
    emit_string_array(w, report.doc);
    w.comma();
    w.key("score");
    w.number(report.score);
    w.comma();
    w.key("localization");
    emit_matrix(w, report.localization);
    w.comma();
    w.key("contributions");
    emit_double_array(w, report.contributions);
    w.comma();
    w.key("similarities");
    emit_double_array(w, report.similarities);
    w.comma();
    w.key("effective_terms");
    emit_terms(w, report.effective);
    w.comma();
    w.key("filtered_terms");
    emit_terms(w, report.filtered);
    w.comma();
    w.key("snippets");
    w.raw("{");
    w.key("vanilla");
    emit_span(w, report.snippet_vanilla);
    w.comma();
    w.key("gradcam");
    emit_span(w, report.snippet_gradcam);
    w.comma();
    w.key("same_span");
    w.raw(report.snippet_vanilla.start == report.snippet_gradcam.start &&
                  report.snippet_vanilla.end == report.snippet_gradcam.end
              ? "true"
              : "false");
    w.raw("}");
    w.comma();
    w.key("kurtosis");
    if (report.kurtosis.has_value()) {
        w.number(*report.kurtosis);
    } else {
        w.raw("null");
    }
    w.comma();
    w.key("total");
    w.number(report.total);
    w.raw("}");
    return w.take();
}

ExplanationReport report_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FormatError("report is not valid JSON");
    try {
        if (j.at("schema_version").get<int>() != 1) {
            throw FormatError("unsupported report schema version");
        }
        ExplanationReport report;
        report.query = parse_string_array(j.at("query"));
        report.doc = parse_string_array(j.at("doc"));
        report.score = j.at("score").get<double>();
        report.localization = parse_matrix(j.at("localization"));
        report.contributions = j.at("contributions").get<std::vector<double>>();
        report.similarities = j.at("similarities").get<std::vector<double>>();
        report.effective = parse_terms(j.at("effective_terms"));
        report.filtered = parse_terms(j.at("filtered_terms"));
        report.snippet_vanilla = parse_span(j.at("snippets").at("vanilla"));
        report.snippet_gradcam = parse_span(j.at("snippets").at("gradcam"));
        if (!j.at("kurtosis").is_null()) {
            report.kurtosis = j.at("kurtosis").get<double>();
        }
        report.total = j.at("total").get<double>();
        return report;
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid report: ") + e.what());
    }
}

std::string corpus_analysis_to_json(const CorpusAnalysis& analysis) {
    JsonWriter w;
    w.raw("{");
    w.key("schema_version");
    w.integer(1);
    w.comma();
    w.key("rows");
    w.raw("[");
    for (std::size_t i = 0; i < analysis.rows.size(); ++i) {
        if (i) w.comma();
        const MapStatistics& row = analysis.rows[i];
        w.raw("{");
        w.key("doc_id");
        w.string(row.doc_id);
        w.comma();
        w.key("label");
        w.string(row.positive ? "positive" : "negative");
        w.comma();
        w.key("score");
        w.number(row.score);
        w.comma();
        w.key("kurtosis");
        if (row.kurtosis.has_value()) {
            w.number(*row.kurtosis);
        } else {
            w.raw("null");
        }
        w.comma();
        w.key("total");
        w.number(row.total);
        w.raw("}");
    }
    w.raw("]");
    w.comma();
    w.key("tests");
    w.raw("[");
    emit_measure_test(w, analysis.kurtosis_test);
    w.comma();
    emit_measure_test(w, analysis.total_test);
    w.raw("]");
    w.comma();
    w.key("failures");
    w.raw("[");
    for (std::size_t i = 0; i < analysis.failures.size(); ++i) {
        if (i) w.comma();
        w.raw("{");
        w.key("doc_id");
        w.string(analysis.failures[i].doc_id);
        w.comma();
        w.key("error");
        w.string(analysis.failures[i].error);
        w.raw("}");
    }
    w.raw("]");
    w.raw("}");
    return w.take();
}

std::string snippet_pair_to_json(const SnippetSpan& vanilla, const SnippetSpan& gradcam) {
    JsonWriter w;
    w.raw("{");
    w.key("vanilla");
    emit_span(w, vanilla);
    w.comma();
    w.key("gradcam");
    emit_span(w, gradcam);
    w.comma();
    w.key("same_span");
    w.raw(vanilla.start == gradcam.start && vanilla.end == gradcam.end ? "true" : "false");
    w.raw("}");
    return w.take();
}

void write_ppm_heatmap(const Matrix& map, const std::filesystem::path& path,
                       std::size_t cell_px) {
    if (map.empty()) throw EmptyInput("cannot render an empty map");
    if (cell_px == 0) throw ConfigError("cell_px must be >= 1");

    double lo = map(0, 0), hi = map(0, 0);
    for (double v : map.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;

    const std::size_t width = map.cols() * cell_px;
    const std::size_t height = map.rows() * cell_px;
    std::string pixels;
    pixels.reserve(width * height * 3);
    for (std::size_t y = 0; y < height; ++y) {
        const std::size_t i = y / cell_px;
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t j = x / cell_px;
            // Constant maps render at the blue end of the ramp.
            const double t = range == 0.0 ? 0.0 : (map(i, j) - lo) / range;
            const unsigned char r = static_cast<unsigned char>(std::lround(255.0 * t));
            const unsigned char b = static_cast<unsigned char>(std::lround(255.0 * (1.0 - t)));
            pixels.push_back(static_cast<char>(r));
            pixels.push_back('\0');
            pixels.push_back(static_cast<char>(b));
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace gradrank
