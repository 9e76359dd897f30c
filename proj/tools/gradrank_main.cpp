// gradrank command line: synth -> train -> score/explain/snippet/stats over
// the embedding, dataset, and model file formats documented in the README.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gradrank/gradcam.hpp"
#include "gradrank/interaction.hpp"
#include "gradrank/ranker.hpp"
#include "gradrank/report.hpp"
#include "gradrank/snippet.hpp"
#include "gradrank/stats.hpp"
#include "gradrank/text.hpp"

namespace {

using namespace gradrank;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open document file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw FormatError("failed writing " + path.string());
}

std::string format_double(double v, int precision = 9) {
    char buf[40];
    const auto [end, ec] =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
    (void)ec;
    return std::string(buf, end);
}

std::string join_tokens(const TokenSequence& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

int cmd_synth(std::size_t queries, std::size_t vocab, std::uint64_t seed,
              const std::string& out_dataset, const std::string& out_embeddings) {
    const SyntheticCorpus corpus = generate_synthetic_corpus(queries, vocab, seed);

    std::string emb_text;
    for (const auto& token : corpus.embeddings.tokens()) {
        emb_text += token;
        for (double v : corpus.embeddings.lookup(token)) {
            emb_text += ' ';
            emb_text += format_double(v, 17);  // exact double round-trip
        }
        emb_text += '\n';
    }
    write_text_file(out_embeddings, emb_text);

    std::string ds_text;
    for (const auto& record : corpus.dataset.records) {
        ds_text += record.id;
        ds_text += '\t';
        ds_text += join_tokens(record.query);
        ds_text += '\t';
        ds_text += join_tokens(record.positive);
        for (const auto& negative : record.negatives) {
            ds_text += '\t';
            ds_text += join_tokens(negative);
        }
        ds_text += '\n';
    }
    write_text_file(out_dataset, ds_text);

    std::printf("wrote %zu records to %s and %zu embeddings to %s\n",
                corpus.dataset.records.size(), out_dataset.c_str(), corpus.embeddings.size(),
                out_embeddings.c_str());
    return 0;
}

int cmd_train(const std::string& dataset_path, const std::string& embeddings_path,
              const std::string& out_path, std::size_t epochs, double lr, double margin,
              std::uint64_t seed) {
    const EmbeddingTable embeddings = load_embeddings(embeddings_path, seed);
    const RankingDataset dataset = load_dataset(dataset_path);

    RankerConfig config;
    config.seed = seed;
    RankerModel model = init_model(config);

    TrainOptions options;
    options.epochs = epochs;
    options.lr = lr;
    options.margin = margin;
    const auto history = train(model, dataset, embeddings, options);
    for (const auto& stats : history) {
        std::printf("epoch %zu: loss %s (active %zu/%zu)\n", stats.epoch,
                    format_double(stats.mean_loss).c_str(), stats.active_triples, stats.triples);
    }
    std::printf("pairwise accuracy %s\n",
                format_double(pairwise_accuracy(model, dataset, embeddings)).c_str());

    save_model(model, out_path);
    std::printf("model written to %s\n", out_path.c_str());
    return 0;
}

int cmd_score(const std::string& model_path, const std::string& embeddings_path,
              const std::string& query_text, const std::string& doc_file, std::uint64_t seed) {
    const RankerModel model = load_model(model_path);
    const EmbeddingTable embeddings = load_embeddings(embeddings_path, seed);
    const TokenSequence query = tokenize(query_text, kDefaultMaxQueryTokens);
    const TokenSequence doc = tokenize(read_text_file(doc_file), kDefaultMaxDocTokens);
    const Matrix m = build_interaction_matrix(query, doc, embeddings);
    std::printf("%s\n", format_double(score(model, m)).c_str());
    return 0;
}

int cmd_explain(const std::string& model_path, const std::string& embeddings_path,
                const std::string& query_text, const std::string& doc_file,
                const std::string& out_dir, std::size_t top_k, std::size_t window,
                std::size_t cell_px, std::uint64_t seed) {
    const RankerModel model = load_model(model_path);
    const EmbeddingTable embeddings = load_embeddings(embeddings_path, seed);
    const TokenSequence query = tokenize(query_text, kDefaultMaxQueryTokens);
    const TokenSequence doc = tokenize(read_text_file(doc_file), kDefaultMaxDocTokens);

    ExplainOptions options;
    options.top_k = top_k;
    options.window = window;
    const ExplanationReport report = explain(model, query, doc, embeddings, options);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_text_file(dir / "report.json", report_to_json(report));
    write_ppm_heatmap(report.localization, dir / "L.ppm", cell_px);
    write_ppm_heatmap(report.interaction, dir / "M.ppm", cell_px);

    std::printf("score %s\n", format_double(report.score).c_str());
    std::printf("effective:");
    for (const auto& t : report.effective) std::printf(" %s", t.token.c_str());
    std::printf("\nfiltered:");
    for (const auto& t : report.filtered) std::printf(" %s", t.token.c_str());
    std::printf("\nreport.json, L.ppm, M.ppm written to %s\n", out_dir.c_str());
    return 0;
}

int cmd_snippet(const std::string& model_path, const std::string& embeddings_path,
                const std::string& query_text, const std::string& doc_file, std::size_t window,
                std::uint64_t seed) {
    const RankerModel model = load_model(model_path);
    const EmbeddingTable embeddings = load_embeddings(embeddings_path, seed);
    const TokenSequence query = tokenize(query_text, kDefaultMaxQueryTokens);
    const TokenSequence doc = tokenize(read_text_file(doc_file), kDefaultMaxDocTokens);

    const ScoredLocalization scored = localize(model, query, doc, embeddings);
    const std::vector<double> contributions = flatten_columns(scored.upsampled);

    const SnippetSpan vanilla = vanilla_snippet(query, doc, window);
    const SnippetSpan gradcam = gradcam_snippet(query, doc, contributions, window);

    std::printf("vanilla [%zu, %zu): %s\n", vanilla.start, vanilla.end,
                join_tokens(vanilla.tokens).c_str());
    std::printf("gradcam [%zu, %zu): %s\n", gradcam.start, gradcam.end,
                join_tokens(gradcam.tokens).c_str());
    const bool same = vanilla.start == gradcam.start && vanilla.end == gradcam.end;
    std::printf("spans: %s\n", same ? "same" : "different");
    std::printf("%s\n", snippet_pair_to_json(vanilla, gradcam).c_str());
    return 0;
}

int cmd_stats(const std::string& model_path, const std::string& embeddings_path,
              const std::string& dataset_path, const std::string& out_path, std::uint64_t seed) {
    const RankerModel model = load_model(model_path);
    const EmbeddingTable embeddings = load_embeddings(embeddings_path, seed);
    const RankingDataset dataset = load_dataset(dataset_path);

    const CorpusAnalysis analysis = corpus_analysis(model, dataset, embeddings);
    const std::string json = corpus_analysis_to_json(analysis);
    if (out_path.empty()) {
        std::printf("%s\n", json.c_str());
    } else {
        write_text_file(out_path, json);
        std::printf("analysis written to %s\n", out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train, score, and explain a small neural ranker over token interaction "
                 "matrices"};
    app.require_subcommand(1);

    std::string model_path, embeddings_path, dataset_path, query_text, doc_file, out_path;
    std::size_t window = 20, top_k = 5, cell_px = 16, epochs = 10;
    std::size_t synth_queries = 200, synth_vocab = 300;
    double lr = 0.05, margin = 1.0;
    std::uint64_t seed = 7;
    std::string out_dataset = "dataset.tsv", out_embeddings = "embeddings.txt";

    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
    synth->add_option("--queries", synth_queries, "Number of queries");
    synth->add_option("--vocab", synth_vocab, "Vocabulary size (>= 20)");
    synth->add_option("--seed", seed, "Random seed");
    synth->add_option("--out-dataset", out_dataset, "Dataset output path");
    synth->add_option("--out-embeddings", out_embeddings, "Embeddings output path");

    auto* train_cmd = app.add_subcommand("train", "Train a ranker with pairwise hinge loss");
    train_cmd->add_option("--dataset", dataset_path, "Dataset file")->required();
    train_cmd->add_option("--embeddings", embeddings_path, "Embedding file")->required();
    train_cmd->add_option("--out", out_path, "Model output path")->required();
    train_cmd->add_option("--epochs", epochs, "Training epochs");
    train_cmd->add_option("--lr", lr, "Learning rate");
    train_cmd->add_option("--margin", margin, "Hinge margin");
    train_cmd->add_option("--seed", seed, "Random seed");

    auto* score_cmd = app.add_subcommand("score", "Score one query-document pair");
    score_cmd->add_option("--model", model_path, "Model file")->required();
    score_cmd->add_option("--embeddings", embeddings_path, "Embedding file")->required();
    score_cmd->add_option("--query", query_text, "Query text")->required();
    score_cmd->add_option("--doc-file", doc_file, "Document text file")->required();
    score_cmd->add_option("--seed", seed, "Random seed (OOV vector)");

    auto* explain_cmd =
        app.add_subcommand("explain", "Write report.json plus L.ppm / M.ppm heatmaps");
    explain_cmd->add_option("--model", model_path, "Model file")->required();
    explain_cmd->add_option("--embeddings", embeddings_path, "Embedding file")->required();
    explain_cmd->add_option("--query", query_text, "Query text")->required();
    explain_cmd->add_option("--doc-file", doc_file, "Document text file")->required();
    explain_cmd->add_option("--out", out_path, "Output directory")->required();
    explain_cmd->add_option("--top-k", top_k, "Effective terms to keep");
    explain_cmd->add_option("--window", window, "Snippet window size");
    explain_cmd->add_option("--cell-px", cell_px, "Pixels per matrix cell in heatmaps");
    explain_cmd->add_option("--seed", seed, "Random seed (OOV vector)");

    auto* snippet_cmd = app.add_subcommand("snippet", "Compare both snippet generators");
    snippet_cmd->add_option("--model", model_path, "Model file")->required();
    snippet_cmd->add_option("--embeddings", embeddings_path, "Embedding file")->required();
    snippet_cmd->add_option("--query", query_text, "Query text")->required();
    snippet_cmd->add_option("--doc-file", doc_file, "Document text file")->required();
    snippet_cmd->add_option("--window", window, "Snippet window size");
    snippet_cmd->add_option("--seed", seed, "Random seed (OOV vector)");

    auto* stats_cmd = app.add_subcommand("stats", "Corpus-level separation analysis");
    stats_cmd->add_option("--model", model_path, "Model file")->required();
    stats_cmd->add_option("--embeddings", embeddings_path, "Embedding file")->required();
    stats_cmd->add_option("--dataset", dataset_path, "Dataset file")->required();
    stats_cmd->add_option("--out", out_path, "Output path (stdout when omitted)");
    stats_cmd->add_option("--seed", seed, "Random seed (OOV vector)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_queries, synth_vocab, seed, out_dataset, out_embeddings);
        }
        if (train_cmd->parsed()) {
            return cmd_train(dataset_path, embeddings_path, out_path, epochs, lr, margin, seed);
        }
        if (score_cmd->parsed()) {
            return cmd_score(model_path, embeddings_path, query_text, doc_file, seed);
        }
        if (explain_cmd->parsed()) {
            return cmd_explain(model_path, embeddings_path, query_text, doc_file, out_path, top_k,
                               window, cell_px, seed);
        }
        if (snippet_cmd->parsed()) {
            return cmd_snippet(model_path, embeddings_path, query_text, doc_file, window, seed);
        }
        if (stats_cmd->parsed()) {
            return cmd_stats(model_path, embeddings_path, dataset_path, out_path, seed);
        }
    } catch (const gradrank::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
