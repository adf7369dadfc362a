#pragma once

#include "shiftlab/bm25_index.hpp"
#include "shiftlab/datamodel.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shiftlab::augment {

inline constexpr std::string_view kDefaultSentinel = "__";

// ---------------------------------------------------------------------------
// Answer sampling

struct SamplingStrategy {
    enum class Kind {
        MostFrequent,         ///< top-n mentions by frequency
        UniformOverTypes,     ///< type uniformly, then a mention of that type uniformly
        Random,               ///< a mention uniformly, ignoring types
        ProportionalToTarget, ///< type from target_type_distribution, then a mention uniformly
    };

    Kind kind = Kind::UniformOverTypes;
    std::map<std::string, double> target_type_distribution;

    static SamplingStrategy most_frequent() { return {Kind::MostFrequent, {}}; }
    static SamplingStrategy uniform_over_types() { return {Kind::UniformOverTypes, {}}; }
    static SamplingStrategy random() { return {Kind::Random, {}}; }
    static SamplingStrategy proportional(std::map<std::string, double> distribution) {
        return {Kind::ProportionalToTarget, std::move(distribution)};
    }
};

std::string_view to_string(SamplingStrategy::Kind kind);
/// Accepts most-frequent, uniform-over-types, random and proportional.
SamplingStrategy::Kind sampling_kind_from_string(std::string_view s);

struct SampledAnswer {
    std::string surface;
    std::string entity_type;

    bool operator==(const SampledAnswer&) const = default;
};

/// Draws n answers; the result depends only on (catalog, strategy, n, seed).
/// MostFrequent orders by frequency, then surface, then type, and cycles
/// through the catalog when n exceeds its size.
std::vector<SampledAnswer> sample_answers(const EntityCatalog& catalog, const SamplingStrategy& strategy, std::size_t n,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cloze construction

struct ClozeExample {
    std::string question;
    std::string answer; ///< surface form as it appears in the sentence
    std::string source_passage_id;
    Span sentence_span;

    bool operator==(const ClozeExample&) const = default;
};

/// Replaces every word-boundary, case-folded occurrence of `answer` in
/// `sentence` by `sentinel`. Throws DataError when the answer is absent,
/// covers the whole sentence, appears with differing surface forms, or
/// when the masked question would still leak the answer or fail to
/// reconstruct the sentence.
ClozeExample make_cloze(std::string_view sentence, std::string_view answer,
                        std::string_view sentinel = kDefaultSentinel);

/// Substitutes example.answer for each sentinel, left to right.
std::string reconstruct_sentence(const ClozeExample& example, std::string_view sentinel = kDefaultSentinel);

struct ClozeStats {
    std::size_t requested = 0;
    std::size_t emitted = 0;
    std::size_t skipped_absent = 0;   ///< no sentence contains the answer
    std::size_t skipped_unusable = 0; ///< make_cloze rejected the best sentence
};

struct ClozeDataset {
    std::vector<ClozeExample> examples; ///< in sampling order
    ClozeStats stats;
};

/// Samples answers, aligns each with its best containing sentence and masks
/// it. Throws DataError carrying the skip counts when nothing is produced.
ClozeDataset generate_cloze_dataset(const EntityCatalog& catalog, const SamplingStrategy& strategy, std::size_t n,
                                    const bm25::SentenceIndex& sentences, std::uint64_t seed,
                                    std::string_view sentinel = kDefaultSentinel, std::size_t workers = 1);

/// Cloze examples in the QA schema with style=cloze and ids "<prefix><n>".
std::vector<QAPair> to_qa_pairs(std::span<const ClozeExample> examples, std::string_view id_prefix = "cloze-");

// ---------------------------------------------------------------------------
// Question-generation ingestion

struct QgenRecord {
    std::string id; ///< optional in the file
    std::string question;
    std::string answer;
    std::string passage_id;
};

struct QgenIngest {
    std::vector<QAPair> pairs;
    std::size_t dropped_missing_answer = 0;
    std::size_t dropped_unknown_passage = 0;
};

QgenIngest ingest_qgen_records(std::span<const QgenRecord> records, const Corpus& corpus);

/// Reads {question, answer, passage_id} JSONL. Malformed lines throw;
/// pairs whose answer is not in their passage are dropped and counted.
QgenIngest ingest_qgen_pairs(const std::filesystem::path& path, const Corpus& corpus);

// ---------------------------------------------------------------------------
// Few-shot generation filter

enum class FilterReason { ContainsNumber, NoVerbatimSpan, LowOverlap, Passed };

std::string_view to_string(FilterReason reason);

struct FilterVerdict {
    bool accepted = false;
    FilterReason reason = FilterReason::Passed;
    double overlap = 0.0;

    bool operator==(const FilterVerdict&) const = default;
};

struct FilterOptions {
    double min_overlap = 0.75;
    std::size_t min_span = 5;
};

/// Fixed English stopword list used by the overlap heuristic.
const std::set<std::string, std::less<>>& stopwords();

/// Checks, in order: any decimal digit; no run of min_span generated tokens
/// found verbatim in the passage; stopword-free word-set overlap
/// |G ∩ P| / |G| below min_overlap. The overlap is always reported.
FilterVerdict fewshot_filter(std::string_view passage, std::string_view generated, const FilterOptions& options = {});

/// Turns an accepted generation into a cloze example masking the most
/// frequent catalog mention it contains. Returns nullopt when the
/// generation fails the filter or contains no usable mention.
std::optional<ClozeExample> cloze_from_generated(std::string_view passage, std::string_view generated,
                                                 const EntityCatalog& catalog,
                                                 std::string_view sentinel = kDefaultSentinel,
                                                 const FilterOptions& options = {});

struct Generation {
    std::string passage_id;
    std::string text;
};

/// Reads {passage_id, generation} JSONL produced by the generation bridge.
std::vector<Generation> load_generations(const std::filesystem::path& path);

} // namespace shiftlab::augment
