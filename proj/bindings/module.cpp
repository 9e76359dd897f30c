#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gradrank/gradcam.hpp"
#include "gradrank/interaction.hpp"
#include "gradrank/ranker.hpp"
#include "gradrank/report.hpp"
#include "gradrank/snippet.hpp"
#include "gradrank/stats.hpp"
#include "gradrank/term_analysis.hpp"
#include "gradrank/text.hpp"

namespace py = pybind11;
namespace gr = gradrank;

namespace {

gr::Matrix matrix_from_lists(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw gr::ShapeError("matrix rows must be non-empty");
    }
    gr::Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw gr::ShapeError("ragged matrix rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> matrix_to_lists(const gr::Matrix& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    }
    return rows;
}

const char* direction_name(gr::Direction d) {
    switch (d) {
        case gr::Direction::a_greater: return "positive";
        case gr::Direction::b_greater: return "negative";
        default: return "tied";
    }
}

}  // namespace

PYBIND11_MODULE(gradrank, m) {
    m.doc() = "Neural ranker over token interaction matrices with Grad-CAM explanations";

    py::register_exception<gr::Error>(m, "GradrankError");

    py::class_<gr::Matrix>(m, "Matrix")
        .def(py::init(&matrix_from_lists), py::arg("rows"))
        .def_property_readonly("rows", &gr::Matrix::rows)
        .def_property_readonly("cols", &gr::Matrix::cols)
        .def("at", [](const gr::Matrix& self, std::size_t i, std::size_t j) {
            if (i >= self.rows() || j >= self.cols()) throw py::index_error();
            return self(i, j);
        })
        .def("to_lists", &matrix_to_lists)
        .def("__eq__", [](const gr::Matrix& a, const gr::Matrix& b) { return a == b; });

    m.def("tokenize", &gr::tokenize, py::arg("text"),
          py::arg("max_len") = gr::kDefaultMaxQueryTokens);

    py::class_<gr::EmbeddingTable>(m, "EmbeddingTable")
        .def(py::init<std::size_t, std::vector<double>>(), py::arg("dim"), py::arg("oov_vector"))
        .def_property_readonly("dim", &gr::EmbeddingTable::dim)
        .def("__len__", &gr::EmbeddingTable::size)
        .def("__contains__", &gr::EmbeddingTable::contains)
        .def("insert", &gr::EmbeddingTable::insert)
        .def("lookup", &gr::EmbeddingTable::lookup)
        .def_property_readonly("oov_vector", &gr::EmbeddingTable::oov_vector);

    m.def("load_embeddings", &gr::load_embeddings, py::arg("path"), py::arg("seed") = 0);

    py::class_<gr::RankingRecord>(m, "RankingRecord")
        .def_readonly("id", &gr::RankingRecord::id)
        .def_readonly("query", &gr::RankingRecord::query)
        .def_readonly("positive", &gr::RankingRecord::positive)
        .def_readonly("negatives", &gr::RankingRecord::negatives);

    py::class_<gr::RankingDataset>(m, "RankingDataset")
        .def(py::init<>())
        .def_readonly("records", &gr::RankingDataset::records)
        .def("__len__", [](const gr::RankingDataset& d) { return d.records.size(); });

    m.def("load_dataset", &gr::load_dataset, py::arg("path"),
          py::arg("max_query_tokens") = gr::kDefaultMaxQueryTokens,
          py::arg("max_doc_tokens") = gr::kDefaultMaxDocTokens);

    m.def("build_interaction_matrix", &gr::build_interaction_matrix, py::arg("query"),
          py::arg("doc"), py::arg("embeddings"));
    m.def("flatten_columns", &gr::flatten_columns, py::arg("matrix"));
    m.def("cosine_similarity", &gr::cosine_similarity);

    py::class_<gr::RankerConfig>(m, "RankerConfig")
        .def(py::init([](std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> conv,
                         std::pair<std::size_t, std::size_t> pool_out,
                         std::vector<std::size_t> mlp_hidden, std::uint64_t seed) {
                 gr::RankerConfig config;
                 if (!conv.empty()) {
                     config.conv_layers.clear();
                     for (const auto& [kh, kw, oc] : conv) config.conv_layers.push_back({kh, kw, oc});
                 }
                 config.pool_h = pool_out.first;
                 config.pool_w = pool_out.second;
                 config.mlp_hidden = std::move(mlp_hidden);
                 config.seed = seed;
                 return config;
             }),
             py::arg("conv_layers") = std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{},
             py::arg("pool_out") = std::pair<std::size_t, std::size_t>{4, 8},
             py::arg("mlp_hidden") = std::vector<std::size_t>{32}, py::arg("seed") = 7)
        .def_readwrite("seed", &gr::RankerConfig::seed);

    py::class_<gr::RankerModel>(m, "RankerModel")
        .def_property_readonly("parameter_count",
                               [](const gr::RankerModel& m_) { return gr::parameter_count(m_); })
        .def_property_readonly("revision",
                               [](const gr::RankerModel& m_) { return m_.revision; });

    m.def("init_model", &gr::init_model, py::arg("config") = gr::RankerConfig{});
    m.def("score", &gr::score, py::arg("model"), py::arg("interaction"));
    m.def("save_model", &gr::save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &gr::load_model, py::arg("path"));

    py::class_<gr::EpochStats>(m, "EpochStats")
        .def_readonly("epoch", &gr::EpochStats::epoch)
        .def_readonly("mean_loss", &gr::EpochStats::mean_loss)
        .def_readonly("triples", &gr::EpochStats::triples)
        .def_readonly("active_triples", &gr::EpochStats::active_triples);

    m.def(
        "train",
        [](gr::RankerModel& model, const gr::RankingDataset& data,
           const gr::EmbeddingTable& embeddings, std::size_t epochs, double lr, double margin) {
            gr::TrainOptions options;
            options.epochs = epochs;
            options.lr = lr;
            options.margin = margin;
            return gr::train(model, data, embeddings, options);
        },
        py::arg("model"), py::arg("data"), py::arg("embeddings"), py::arg("epochs") = 10,
        py::arg("lr") = 0.05, py::arg("margin") = 1.0);
    m.def("pairwise_accuracy", &gr::pairwise_accuracy, py::arg("model"), py::arg("data"),
          py::arg("embeddings"));

    m.def("importance_weights", &gr::importance_weights, py::arg("gradient_maps"));
    m.def("localization_map", &gr::localization_map, py::arg("alpha"), py::arg("maps"));
    m.def("bilinear_upsample", &gr::bilinear_upsample, py::arg("source"), py::arg("target_rows"),
          py::arg("target_cols"));

    py::class_<gr::TermEntry>(m, "TermEntry")
        .def_readonly("position", &gr::TermEntry::position)
        .def_readonly("token", &gr::TermEntry::token)
        .def_readonly("contribution", &gr::TermEntry::contribution)
        .def_readonly("similarity", &gr::TermEntry::similarity);

    py::class_<gr::SnippetSpan>(m, "SnippetSpan")
        .def_readonly("start", &gr::SnippetSpan::start)
        .def_readonly("end", &gr::SnippetSpan::end)
        .def_readonly("score", &gr::SnippetSpan::score)
        .def_readonly("tokens", &gr::SnippetSpan::tokens);

    py::class_<gr::ExplanationReport>(m, "ExplanationReport")
        .def_readonly("query", &gr::ExplanationReport::query)
        .def_readonly("doc", &gr::ExplanationReport::doc)
        .def_readonly("score", &gr::ExplanationReport::score)
        .def_readonly("localization", &gr::ExplanationReport::localization)
        .def_readonly("interaction", &gr::ExplanationReport::interaction)
        .def_readonly("contributions", &gr::ExplanationReport::contributions)
        .def_readonly("similarities", &gr::ExplanationReport::similarities)
        .def_readonly("effective", &gr::ExplanationReport::effective)
        .def_readonly("filtered", &gr::ExplanationReport::filtered)
        .def_readonly("snippet_vanilla", &gr::ExplanationReport::snippet_vanilla)
        .def_readonly("snippet_gradcam", &gr::ExplanationReport::snippet_gradcam)
        .def_readonly("kurtosis", &gr::ExplanationReport::kurtosis)
        .def_readonly("total", &gr::ExplanationReport::total)
        .def("to_json", [](const gr::ExplanationReport& r) { return gr::report_to_json(r); });

    m.def(
        "explain",
        [](const gr::RankerModel& model, const gr::TokenSequence& query,
           const gr::TokenSequence& doc, const gr::EmbeddingTable& embeddings, std::size_t top_k,
           double q_sim, double q_contrib, std::size_t window) {
            gr::ExplainOptions options;
            options.top_k = top_k;
            options.q_sim = q_sim;
            options.q_contrib = q_contrib;
            options.window = window;
            return gr::explain(model, query, doc, embeddings, options);
        },
        py::arg("model"), py::arg("query"), py::arg("doc"), py::arg("embeddings"),
        py::arg("top_k") = 5, py::arg("q_sim") = 80.0, py::arg("q_contrib") = 40.0,
        py::arg("window") = 20);

    m.def("effective_terms", &gr::effective_terms, py::arg("contribution"), py::arg("doc"),
          py::arg("k"));
    m.def("filtered_terms", &gr::filtered_terms, py::arg("contribution"), py::arg("similarity"),
          py::arg("doc"), py::arg("q_sim") = 80.0, py::arg("q_contrib") = 40.0);

    m.def("vanilla_snippet", &gr::vanilla_snippet, py::arg("query"), py::arg("doc"),
          py::arg("window") = 20);
    m.def("gradcam_snippet", &gr::gradcam_snippet, py::arg("query"), py::arg("doc"),
          py::arg("contribution"), py::arg("window") = 20);

    m.def("kurtosis", py::overload_cast<const gr::Matrix&>(&gr::kurtosis), py::arg("map"));
    m.def("kurtosis_values", py::overload_cast<const std::vector<double>&>(&gr::kurtosis),
          py::arg("values"));
    m.def("map_total", &gr::map_total, py::arg("map"));

    py::class_<gr::MannWhitneyResult>(m, "MannWhitneyResult")
        .def_readonly("u_a", &gr::MannWhitneyResult::u_a)
        .def_readonly("p_value", &gr::MannWhitneyResult::p_value)
        .def_readonly("n_a", &gr::MannWhitneyResult::n_a)
        .def_readonly("n_b", &gr::MannWhitneyResult::n_b)
        .def_property_readonly("direction", [](const gr::MannWhitneyResult& r) {
            return direction_name(r.direction);
        });

    m.def("mann_whitney_u", &gr::mann_whitney_u, py::arg("a"), py::arg("b"));

    py::class_<gr::MapStatistics>(m, "MapStatistics")
        .def_readonly("doc_id", &gr::MapStatistics::doc_id)
        .def_readonly("positive", &gr::MapStatistics::positive)
        .def_readonly("score", &gr::MapStatistics::score)
        .def_readonly("kurtosis", &gr::MapStatistics::kurtosis)
        .def_readonly("total", &gr::MapStatistics::total);

    py::class_<gr::MeasureTest>(m, "MeasureTest")
        .def_readonly("measure", &gr::MeasureTest::measure)
        .def_readonly("u_statistic", &gr::MeasureTest::u_statistic)
        .def_readonly("p_value", &gr::MeasureTest::p_value)
        .def_readonly("n_pos", &gr::MeasureTest::n_pos)
        .def_readonly("n_neg", &gr::MeasureTest::n_neg)
        .def_readonly("excluded_count", &gr::MeasureTest::excluded_count)
        .def_property_readonly("direction", [](const gr::MeasureTest& t) {
            return direction_name(t.direction);
        });

    py::class_<gr::CorpusAnalysis>(m, "CorpusAnalysis")
        .def_readonly("rows", &gr::CorpusAnalysis::rows)
        .def_readonly("kurtosis_test", &gr::CorpusAnalysis::kurtosis_test)
        .def_readonly("total_test", &gr::CorpusAnalysis::total_test)
        .def("to_json", [](const gr::CorpusAnalysis& a) { return gr::corpus_analysis_to_json(a); });

    m.def("corpus_analysis", &gr::corpus_analysis, py::arg("model"), py::arg("data"),
          py::arg("embeddings"));

    py::class_<gr::SyntheticCorpus>(m, "SyntheticCorpus")
        .def_readonly("dataset", &gr::SyntheticCorpus::dataset)
        .def_readonly("embeddings", &gr::SyntheticCorpus::embeddings);

    m.def("generate_synthetic_corpus", &gr::generate_synthetic_corpus, py::arg("n_queries"),
          py::arg("vocab_size"), py::arg("seed"));

    m.def("report_from_json", &gr::report_from_json, py::arg("text"));
    m.def("write_ppm_heatmap", &gr::write_ppm_heatmap, py::arg("map"), py::arg("path"),
          py::arg("cell_px") = 16);
}
