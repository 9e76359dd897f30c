#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gradrank/errors.hpp"

namespace gradrank {

inline constexpr std::size_t kDefaultMaxQueryTokens = 16;
inline constexpr std::size_t kDefaultMaxDocTokens = 128;

/// Ordered list of normalized tokens.
using TokenSequence = std::vector<std::string>;

/// Lowercases, splits on runs of non-alphanumeric characters, truncates to
/// max_len. Throws EmptyInput when no token survives.
TokenSequence tokenize(std::string_view text, std::size_t max_len);

// Token -> fixed-dimension vector map. Immutable after construction/load;
// lookups of unknown tokens return a shared seeded OOV vector and never
// mutate the table.
class EmbeddingTable {
public:
    EmbeddingTable(std::size_t dim, std::vector<double> oov_vector);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(const std::string& token) const { return entries_.count(token) != 0; }

    /// Throws ShapeError if the vector length differs from dim().
    void insert(const std::string& token, std::vector<double> vector);

    /// Known token -> its vector; unknown token -> the OOV vector.
    const std::vector<double>& lookup(const std::string& token) const;

    const std::vector<double>& oov_vector() const { return oov_; }

    /// Tokens in insertion order (used when writing tables back to disk).
    const std::vector<std::string>& tokens() const { return order_; }

private:
    std::size_t dim_;
    std::unordered_map<std::string, std::vector<double>> entries_;
    std::vector<std::string> order_;
    std::vector<double> oov_;
};

/// Parses the standard text format, one line per token:
///   <token> <f1> <f2> ... <fdim>
/// The first line fixes the dimension. Throws FormatError (with the 1-based
/// line number) on dimension mismatch or an unparsable float. The OOV vector
/// is drawn uniformly from [-0.1, 0.1]^dim using `seed`.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::uint64_t seed);

struct RankingRecord {
    std::string id;
    TokenSequence query;
    TokenSequence positive;
    std::vector<TokenSequence> negatives;
};

struct RankingDataset {
    std::vector<RankingRecord> records;
};

/// Parses line-delimited tab-separated records:
///   <qid>\t<query text>\t<positive doc text>\t<neg doc 1>\t...\t<neg doc k>
/// Every text is tokenized and truncated (queries to max_query_tokens, docs
/// to max_doc_tokens). Throws FormatError with the record index on a missing
/// field, an empty text, or a duplicate id. Record order is preserved.
RankingDataset load_dataset(const std::filesystem::path& path,
                            std::size_t max_query_tokens = kDefaultMaxQueryTokens,
                            std::size_t max_doc_tokens = kDefaultMaxDocTokens);

}  // namespace gradrank
