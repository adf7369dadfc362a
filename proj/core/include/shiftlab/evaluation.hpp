#pragma once

#include "shiftlab/datamodel.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shiftlab::eval {

/// Lowercase, drop ASCII punctuation, remove the articles a/an/the and
/// collapse whitespace.
std::string normalize_answer(std::string_view text);

/// Token-multiset F1 against the best-matching gold answer. Two empty
/// normalized strings score 1; exactly one empty scores 0.
double token_f1(std::string_view prediction, std::span<const std::string> gold_answers);

/// True when the normalized answer occurs in the normalized passage on token
/// boundaries. `normalized_passage` must already be normalize_answer output.
bool contains_answer(std::string_view normalized_passage, std::string_view answer);

/// Ranked passage ids retrieved for one question.
struct RankedList {
    std::string question_id;
    std::vector<std::string> passage_ids;
};

struct QuestionResult {
    std::string question_id;
    bool hit = false;
    double f1 = 0.0;
    std::string matched_passage_id; ///< first top-k passage establishing the hit
    std::string matched_answer;
    std::string prediction;
    std::vector<std::string> gold_answers;

    bool operator==(const QuestionResult&) const = default;
};

struct EvalResult {
    double acc_at_k = 0.0;
    std::size_t k = 0;
    double mean_f1 = 0.0;
    std::size_t n_questions = 0;
    std::vector<QuestionResult> per_question;
    std::optional<double> majority_baseline; ///< set when every question is boolean

    bool operator==(const EvalResult&) const = default;
};

/// Acc@k over `questions`, in question order. Every question needs a ranked
/// list; an unknown passage id in the top k throws DataError. F1 fields are
/// left at zero.
EvalResult acc_at_k(std::span<const RankedList> retrievals, const Corpus& corpus,
                    std::span<const QAPair> questions, std::size_t k = 100);

/// Acc@k plus token F1 of `predictions` (question id -> predicted answer).
/// Every question needs a prediction.
EvalResult evaluate(std::span<const RankedList> retrievals, const Corpus& corpus, std::span<const QAPair> questions,
                    const std::map<std::string, std::string, std::less<>>& predictions, std::size_t k = 100);

/// Retrieval lists made of each question's gold passages, for corpora where
/// Acc@k is computed over oracle passages.
std::vector<RankedList> oracle_retrievals(std::span<const QAPair> questions);

/// Accuracy of always answering the more frequent of yes/no. A tie returns
/// 0.5. Throws DataError on an empty set or a non-boolean question.
double majority_baseline(std::span<const QAPair> boolean_questions);

/// A hit whose reader prediction was still wrong, kept for manual review.
struct AuditCase {
    std::string question_id;
    std::string answer;
    std::string matched_passage_id;
    std::string prediction;
    double f1 = 0.0;

    bool operator==(const AuditCase&) const = default;
};

inline constexpr double kDefaultAuditF1Threshold = 0.1;
inline constexpr std::size_t kDefaultAuditSample = 50;

/// Uniformly samples up to `sample_n` questions that were hits with
/// f1 <= f1_threshold. Cases come back in evaluation order.
std::vector<AuditCase> audit_false_positives(const EvalResult& result, std::size_t sample_n, double f1_threshold,
                                             std::uint64_t seed);

// I/O for the retrieve/eval/audit subcommands.
std::vector<RankedList> load_retrievals(const std::filesystem::path& path);
std::map<std::string, std::string, std::less<>> load_predictions(const std::filesystem::path& path);

/// `config_json` must be a JSON object; it is echoed under "config".
std::string eval_result_to_json(const EvalResult& result, std::string_view config_json = "{}");
EvalResult eval_result_from_json(std::string_view json);
std::string to_jsonl(const AuditCase& c);

} // namespace shiftlab::eval
