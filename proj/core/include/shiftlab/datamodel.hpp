#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace shiftlab {

/// Half-open [begin, end) range of Unicode code points into a passage text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Span&) const = default;
};

struct Passage {
    std::string id;
    std::string corpus_id;
    std::string text;
    std::vector<Span> sentences;

    bool operator==(const Passage&) const = default;
};

/// Text covered by `span`, converted from code-point to byte offsets.
std::string span_text(std::string_view text, Span span);

/// Splits on '.', '!' or '?' when followed by whitespace and an uppercase
/// letter, or by end of text. A candidate sentence shorter than three code
/// points is merged into the next one. Leading whitespace is not part of a
/// sentence; trailing text without a terminator forms a final sentence.
std::vector<Span> split_sentences(std::string_view text);

enum class QuestionStyle { Natural, Cloze, Boolean };

std::string_view to_string(QuestionStyle style);
QuestionStyle question_style_from_string(std::string_view s);

struct QAPair {
    std::string id;
    std::string question;
    std::vector<std::string> answers;
    std::vector<std::string> gold_passage_ids;
    QuestionStyle style = QuestionStyle::Natural;

    bool operator==(const QAPair&) const = default;
};

struct EntityMention {
    std::string surface;
    std::string entity_type;
    std::uint64_t frequency = 1;

    bool operator==(const EntityMention&) const = default;
};

/// Typed entity mentions with per-type frequency totals. Immutable once built.
class EntityCatalog {
public:
    /// Throws DataError on an empty catalog, zero frequency or a duplicate
    /// (surface, entity_type) pair.
    explicit EntityCatalog(std::vector<EntityMention> mentions);

    const std::vector<EntityMention>& mentions() const { return mentions_; }
    const std::map<std::string, std::uint64_t>& type_totals() const { return type_totals_; }

    /// Distinct entity types in lexicographic order.
    const std::vector<std::string>& types() const { return types_; }

    /// Indices into mentions() for one type, in catalog order. Empty when the
    /// type is unknown.
    std::span<const std::size_t> mentions_of_type(std::string_view type) const;

private:
    std::vector<EntityMention> mentions_;
    std::map<std::string, std::uint64_t> type_totals_;
    std::vector<std::string> types_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_type_;
};

/// Retriever energies for one question over its gold context and a sample of
/// other contexts.
struct ScoreMatrix {
    std::string question_id;
    std::size_t gold_index = 0;
    std::vector<std::string> candidate_ids;
    std::vector<double> energies;

    bool operator==(const ScoreMatrix&) const = default;
};

/// Token log-probabilities of a reader for each candidate answer of one
/// question.
struct AnswerLikelihoodRecord {
    std::string question_id;
    std::size_t gold_index = 0;
    std::vector<std::string> candidates;
    std::vector<std::vector<double>> token_logprobs;

    bool operator==(const AnswerLikelihoodRecord&) const = default;
};

struct ShiftStatistics {
    double retriever_stat = 0.0; ///< d_u_t - d_g_t
    double reader_stat = 0.0;    ///< d_u_r - reader_d_u_t
    double d_u_t = 0.0;          ///< retriever distance from uniform
    double d_g_t = 0.0;          ///< retriever distance from gold
    double d_u_r = 0.0;          ///< reference reader distance from uniform
    double reader_d_u_t = 0.0;   ///< target reader distance from uniform
    std::size_t n_examples = 0;
    std::size_t n_reader_examples = 0;

    bool operator==(const ShiftStatistics&) const = default;
};

enum class ShiftLabel { NoShift, LabelShift, CovariateShift, FullShift };

std::string_view to_string(ShiftLabel label);
ShiftLabel shift_label_from_string(std::string_view s);

// Validation. Each throws DataError naming the offending field.
void validate(const Passage& p);
void validate(const QAPair& qa);
void validate(const EntityMention& m);
void validate(const ScoreMatrix& sm);
void validate(const AnswerLikelihoodRecord& rec);
void validate(const ShiftStatistics& stats);

/// A loaded passage collection with id lookup. Immutable after construction.
class Corpus {
public:
    Corpus() = default;
    /// Throws DataError on a duplicate id.
    explicit Corpus(std::vector<Passage> passages);

    const std::vector<Passage>& passages() const { return passages_; }
    std::size_t size() const { return passages_.size(); }
    const Passage* find(std::string_view id) const;

private:
    std::vector<Passage> passages_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Throws DataError for the first gold_passage_id that does not resolve.
void check_gold_links(std::span<const QAPair> pairs, const Corpus& corpus);

// Single-record JSONL codecs. Parsing validates; serialization emits only the
// schema fields, in a fixed order.
std::string to_jsonl(const Passage& p);
std::string to_jsonl(const QAPair& qa);
std::string to_jsonl(const EntityMention& m);
std::string to_jsonl(const ScoreMatrix& sm);
std::string to_jsonl(const AnswerLikelihoodRecord& rec);

Passage parse_passage(std::string_view line);
QAPair parse_qa_pair(std::string_view line);
EntityMention parse_entity_mention(std::string_view line);
ScoreMatrix parse_score_matrix(std::string_view line);
AnswerLikelihoodRecord parse_answer_likelihood(std::string_view line);

// File loaders. Line order is preserved; errors carry "<path>:<line>:".
Corpus load_corpus(const std::filesystem::path& path);
std::vector<QAPair> load_qa_pairs(const std::filesystem::path& path);
EntityCatalog load_entities(const std::filesystem::path& path);
std::vector<ScoreMatrix> load_score_matrices(const std::filesystem::path& path);
std::vector<AnswerLikelihoodRecord> load_answer_likelihoods(const std::filesystem::path& path);

template <class Record>
std::string to_jsonl_document(std::span<const Record> records) {
    std::string out;
    for (const auto& r : records) {
        out += to_jsonl(r);
        out += '\n';
    }
    return out;
}

} // namespace shiftlab
