#pragma once

#include "shiftlab/datamodel.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace shiftlab::bm25 {

/// Okapi BM25 parameters.
struct Params {
    double k1 = 0.9;
    double b = 0.4;

    bool operator==(const Params&) const = default;
};

/// Minimum passage length, in tokens, used when short contexts are filtered
/// out of a retrieval corpus.
inline constexpr std::size_t kMinContextTokens = 50;

/// Lowercases ASCII letters and splits on every non-alphanumeric byte.
/// Bytes >= 0x80 count as alphanumeric, so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

struct Posting {
    std::uint32_t doc = 0; ///< index into InvertedIndex::documents()
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

struct Document {
    std::string id;
    std::uint32_t length = 0;

    bool operator==(const Document&) const = default;
};

struct RetrievalResult {
    std::string passage_id;
    double score = 0.0;

    bool operator==(const RetrievalResult&) const = default;
};

/// Immutable BM25 index. Documents are stored in ascending id order and
/// postings are sorted by document index, hence by id.
class InvertedIndex {
public:
    /// Builds from (id, text) pairs. Throws DataError on invalid parameters,
    /// duplicate ids, or when no document survives the length filter.
    static InvertedIndex build(std::vector<std::pair<std::string, std::string>> docs, Params params,
                               std::optional<std::size_t> min_len_filter);

    /// Assembles an index from already-tokenized parts, checking every
    /// invariant. Used by deserialization and pooling.
    static InvertedIndex assemble(Params params, std::optional<std::size_t> min_len_filter,
                                  std::vector<Document> documents,
                                  std::unordered_map<std::string, std::vector<Posting>> postings);

    const Params& params() const { return params_; }
    std::optional<std::size_t> min_len_filter() const { return min_len_filter_; }
    std::size_t n_docs() const { return documents_.size(); }
    double avg_doc_len() const { return avg_doc_len_; }
    const std::vector<Document>& documents() const { return documents_; }

    std::span<const Posting> postings(std::string_view term) const;
    std::size_t document_frequency(std::string_view term) const { return postings(term).size(); }
    std::optional<std::uint32_t> doc_index(std::string_view id) const;

    /// Vocabulary in lexicographic order.
    std::vector<std::string> vocabulary() const;

    /// IDF(t) = ln(1 + (N - df + 0.5) / (df + 0.5)).
    double idf(std::string_view term) const;

    bool operator==(const InvertedIndex& other) const;

private:
    InvertedIndex() = default;

    Params params_;
    std::optional<std::size_t> min_len_filter_;
    std::vector<Document> documents_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
    double avg_doc_len_ = 0.0;
};

InvertedIndex build_index(std::span<const Passage> passages, Params params = {},
                          std::optional<std::size_t> min_len_filter = std::nullopt);

/// Score of one document; terms repeated in the query count once. Throws
/// DataError for an unknown passage id.
double bm25_score(const InvertedIndex& index, std::span<const std::string> query_tokens,
                  std::string_view passage_id);

/// Top-k documents by descending score, ties by ascending id. Documents with
/// zero score are still ranked, so k >= n_docs returns the whole index.
std::vector<RetrievalResult> search_tokens(const InvertedIndex& index, std::span<const std::string> query_tokens,
                                           std::size_t k);
std::vector<RetrievalResult> search(const InvertedIndex& index, std::string_view query, std::size_t k);

/// Merges indexes built with the same parameters into one index over the
/// union; N and average length are recomputed. Throws DataError on id
/// collisions or mismatched parameters.
InvertedIndex pool_indexes(std::span<const InvertedIndex> indexes);

/// Id given to a passage inside a pooled index.
std::string pooled_id(const Passage& p);

/// Builds one index over several corpora, prefixing each passage id with its
/// corpus_id ("corpus/id").
InvertedIndex pool_corpora(std::span<const Corpus> corpora, Params params = {},
                           std::optional<std::size_t> min_len_filter = std::nullopt);

/// Corpus whose ids match pool_corpora's output.
Corpus pooled_corpus(std::span<const Corpus> corpora);

// ---------------------------------------------------------------------------
// Sentence-level retrieval

struct SentenceUnit {
    std::string passage_id;
    Span span;
    std::string text;

    bool operator==(const SentenceUnit&) const = default;
};

/// BM25 index whose documents are individual sentences. The document id of
/// unit i is "<passage_id>#<sentence number>".
class SentenceIndex {
public:
    SentenceIndex(InvertedIndex index, std::vector<SentenceUnit> units);

    const InvertedIndex& index() const { return index_; }
    const std::vector<SentenceUnit>& units() const { return units_; }
    /// Unit behind a document index of index().
    const SentenceUnit& unit_for_doc(std::uint32_t doc) const { return units_[doc_to_unit_[doc]]; }

private:
    InvertedIndex index_;
    std::vector<SentenceUnit> units_;
    std::vector<std::size_t> doc_to_unit_;
};

SentenceIndex build_sentence_index(std::span<const Passage> passages, Params params = {});

struct SentenceMatch {
    std::string passage_id;
    Span span;
    std::string text;
    double score = 0.0;
};

/// Highest-scoring sentence for `query_tokens` among sentences that contain
/// at least one of `answers` (case-folded, on word boundaries). Ties go to
/// the smaller document id.
std::optional<SentenceMatch> best_sentence_containing(const SentenceIndex& index,
                                                      std::span<const std::string> query_tokens,
                                                      std::span<const std::string> answers);

/// Sentence alignment for a QA pair: the query is question tokens plus
/// answer tokens.
std::optional<SentenceMatch> align_sentence(const QAPair& qa, const SentenceIndex& index);

// ---------------------------------------------------------------------------
// Persistence: JSONL with a versioned header line.

inline constexpr int kIndexFormatVersion = 1;

std::string serialize_index(const InvertedIndex& index);
std::string serialize_index(const SentenceIndex& index);

struct LoadedIndex {
    InvertedIndex index;
    std::optional<std::vector<SentenceUnit>> units; ///< set for sentence indexes
};

LoadedIndex parse_index(std::string_view content);
LoadedIndex load_index(const std::filesystem::path& path);
SentenceIndex load_sentence_index(const std::filesystem::path& path);

} // namespace shiftlab::bm25
