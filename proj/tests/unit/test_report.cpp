#include <array>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gradrank/gradcam.hpp"
#include "gradrank/report.hpp"
#include "gradrank/stats.hpp"

using namespace gradrank;

namespace {

ExplanationReport sample_report() {
    const SyntheticCorpus corpus = generate_synthetic_corpus(3, 26, 91);
    const RankerModel model = init_model(RankerConfig{});
    const auto& record = corpus.dataset.records[0];
    return explain(model, record.query, record.positive, corpus.embeddings);
}

}  // namespace

TEST_CASE("report JSON is byte-stable through a parse/serialize round trip") {
    const ExplanationReport report = sample_report();
    const std::string once = report_to_json(report);
    const ExplanationReport parsed = report_from_json(once);
    // Lossless at the declared 9-significant-digit precision: re-serializing
    // the parsed report reproduces the bytes exactly.
    const std::string twice = report_to_json(parsed);
    CHECK(once == twice);

    CHECK(parsed.query == report.query);
    CHECK(parsed.doc == report.doc);
    REQUIRE(parsed.effective.size() == report.effective.size());
    for (std::size_t i = 0; i < parsed.effective.size(); ++i) {
        CHECK(parsed.effective[i].position == report.effective[i].position);
        CHECK(parsed.effective[i].token == report.effective[i].token);
        CHECK(parsed.effective[i].contribution ==
              doctest::Approx(report.effective[i].contribution).epsilon(1e-8));
    }
    CHECK(parsed.filtered.size() == report.filtered.size());
    CHECK(parsed.snippet_vanilla.start == report.snippet_vanilla.start);
    CHECK(parsed.snippet_vanilla.end == report.snippet_vanilla.end);
    CHECK(parsed.snippet_gradcam.start == report.snippet_gradcam.start);
    CHECK(parsed.snippet_gradcam.tokens == report.snippet_gradcam.tokens);
    CHECK(parsed.score == doctest::Approx(report.score).epsilon(1e-8));
    CHECK(parsed.contributions.size() == report.contributions.size());
    CHECK(parsed.localization.same_shape(report.localization));
    CHECK(parsed.kurtosis.has_value() == report.kurtosis.has_value());
}

TEST_CASE("report JSON starts with the schema version and fixed key order") {
    const std::string text = report_to_json(sample_report());
    CHECK(text.rfind("{\"schema_version\":1,\"query\":", 0) == 0);
}

TEST_CASE("null kurtosis survives the round trip") {
    ExplanationReport report = sample_report();
    report.kurtosis.reset();
    const std::string text = report_to_json(report);
    CHECK(text.find("\"kurtosis\":null") != std::string::npos);
    CHECK_FALSE(report_from_json(text).kurtosis.has_value());
}

TEST_CASE("malformed reports are rejected") {
    CHECK_THROWS_AS(report_from_json("not json"), FormatError);
    CHECK_THROWS_AS(report_from_json("{\"schema_version\":1}"), FormatError);
    CHECK_THROWS_AS(report_from_json("{\"schema_version\":99}"), FormatError);
}

TEST_CASE("corpus analysis JSON carries rows, tests, and failures") {
    const SyntheticCorpus corpus = generate_synthetic_corpus(3, 24, 92);
    const RankerModel model = init_model(RankerConfig{});
    const CorpusAnalysis analysis = corpus_analysis(model, corpus.dataset, corpus.embeddings);
    const std::string text = corpus_analysis_to_json(analysis);

    CHECK(text.find("\"rows\":[") != std::string::npos);
    CHECK(text.find("\"measure\":\"kurtosis\"") != std::string::npos);
    CHECK(text.find("\"measure\":\"total\"") != std::string::npos);
    CHECK(text.find("\"excluded_count\":") != std::string::npos);
    CHECK(text.find("\"failures\":[") != std::string::npos);

    // Deterministic emission.
    CHECK(text == corpus_analysis_to_json(analysis));
}

TEST_CASE("ppm heatmaps have the declared geometry and header") {
    const auto path = std::filesystem::temp_directory_path() / "gradrank_heat.ppm";
    const Matrix map = Matrix::from_rows({{0.0, 0.5}, {1.0, 0.25}});
    write_ppm_heatmap(map, path, 4);

    std::ifstream in(path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header == "P6");
    std::size_t width = 0, height = 0;
    in >> width >> height;
    CHECK(width == 2 * 4);
    CHECK(height == 2 * 4);
    int maxval = 0;
    in >> maxval;
    CHECK(maxval == 255);
    in.get();
    std::string pixels((std::istreambuf_iterator<char>(in)), {});
    CHECK(pixels.size() == width * height * 3);

    // min cell pure blue, max cell pure red
    const auto pixel_at = [&](std::size_t x, std::size_t y) {
        const std::size_t off = (y * width + x) * 3;
        return std::array<unsigned char, 3>{static_cast<unsigned char>(pixels[off]),
                                            static_cast<unsigned char>(pixels[off + 1]),
                                            static_cast<unsigned char>(pixels[off + 2])};
    };
    CHECK(pixel_at(0, 0) == std::array<unsigned char, 3>{0, 0, 255});    // value 0.0
    CHECK(pixel_at(0, 4) == std::array<unsigned char, 3>{255, 0, 0});    // value 1.0
}

TEST_CASE("constant maps render all blue") {
    const auto path = std::filesystem::temp_directory_path() / "gradrank_flat.ppm";
    write_ppm_heatmap(Matrix(3, 5, 0.7), path, 2);
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::getline(in, line);
    std::string pixels((std::istreambuf_iterator<char>(in)), {});
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        CHECK(static_cast<unsigned char>(pixels[i]) == 0);
        CHECK(static_cast<unsigned char>(pixels[i + 1]) == 0);
        CHECK(static_cast<unsigned char>(pixels[i + 2]) == 255);
    }
}
