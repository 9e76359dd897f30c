#include "gradrank/text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gradrank/rng.hpp"

namespace gradrank {

namespace {

bool is_alnum_ascii(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char to_lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

double parse_double(std::string_view text, std::size_t line_no) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse float '" +
                          std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
        fields.back().pop_back();
    }
    return fields;
}

}  // namespace

TokenSequence tokenize(std::string_view text, std::size_t max_len) {
    TokenSequence tokens;
    std::string current;
    for (char c : text) {
        if (is_alnum_ascii(c)) {
            current.push_back(to_lower_ascii(c));
        } else if (!current.empty()) {
            if (tokens.size() < max_len) tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty() && tokens.size() < max_len) tokens.push_back(std::move(current));
    if (tokens.empty()) {
        throw EmptyInput("text contains no alphanumeric tokens");
    }
    return tokens;
}

EmbeddingTable::EmbeddingTable(std::size_t dim, std::vector<double> oov_vector)
    : dim_(dim), oov_(std::move(oov_vector)) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
    if (oov_.size() != dim_) {
        throw ShapeError("oov vector length " + std::to_string(oov_.size()) +
                         " does not match dim " + std::to_string(dim_));
    }
}

void EmbeddingTable::insert(const std::string& token, std::vector<double> vector) {
    if (vector.size() != dim_) {
        throw ShapeError("vector length " + std::to_string(vector.size()) +
                         " does not match dim " + std::to_string(dim_));
    }
    auto [it, inserted] = entries_.insert_or_assign(token, std::move(vector));
    if (inserted) order_.push_back(token);
}

const std::vector<double>& EmbeddingTable::lookup(const std::string& token) const {
    const auto it = entries_.find(token);
    return it == entries_.end() ? oov_ : it->second;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open embedding file " + path.string());

    std::size_t dim = 0;
    std::vector<std::pair<std::string, std::vector<double>>> parsed;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() < 2) {
            throw FormatError("line " + std::to_string(line_no) + ": no vector components");
        }
        std::vector<double> vec;
        vec.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            vec.push_back(parse_double(fields[i], line_no));
        }
        if (dim == 0) {
            dim = vec.size();
        } else if (vec.size() != dim) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(dim) + " components, got " +
                              std::to_string(vec.size()));
        }
        parsed.emplace_back(std::string(fields[0]), std::move(vec));
    }
    if (dim == 0) throw FormatError("no embedding entries in " + path.string());

    Rng rng(seed);
    std::vector<double> oov(dim);
    for (auto& x : oov) x = rng.uniform(-0.1, 0.1);

    EmbeddingTable table(dim, std::move(oov));
    for (auto& [token, vec] : parsed) table.insert(token, std::move(vec));
    return table;
}

RankingDataset load_dataset(const std::filesystem::path& path, std::size_t max_query_tokens,
                            std::size_t max_doc_tokens) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open dataset file " + path.string());

    RankingDataset dataset;
    std::unordered_map<std::string, std::size_t> seen_ids;
    std::string line;
    std::size_t record_no = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++record_no;
        const auto fields = split_tabs(line);
        if (fields.size() < 4) {
            throw FormatError("record " + std::to_string(record_no) +
                              ": expected <qid>, <query>, <positive>, and at least one "
                              "negative, got " + std::to_string(fields.size()) + " fields");
        }
        RankingRecord record;
        record.id = fields[0];
        if (record.id.empty()) {
            throw FormatError("record " + std::to_string(record_no) + ": empty id");
        }
        if (!seen_ids.emplace(record.id, record_no).second) {
            throw FormatError("record " + std::to_string(record_no) + ": duplicate id '" +
                              record.id + "'");
        }
        try {
            record.query = tokenize(fields[1], max_query_tokens);
        } catch (const EmptyInput&) {
            throw FormatError("record " + std::to_string(record_no) + ": empty query text");
        }
        try {
            record.positive = tokenize(fields[2], max_doc_tokens);
        } catch (const EmptyInput&) {
            throw FormatError("record " + std::to_string(record_no) + ": empty positive doc");
        }
        for (std::size_t i = 3; i < fields.size(); ++i) {
            try {
                record.negatives.push_back(tokenize(fields[i], max_doc_tokens));
            } catch (const EmptyInput&) {
                throw FormatError("record " + std::to_string(record_no) + ": empty negative doc " +
                                  std::to_string(i - 2));
            }
        }
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

}  // namespace gradrank
