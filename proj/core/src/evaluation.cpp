#include "shiftlab/evaluation.hpp"

#include "json_codec.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/io.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace shiftlab::eval {

using detail::Json;
using detail::OrderedJson;

namespace {

bool is_ascii_punct(unsigned char c) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_ascii_space(s[i])) {
            ++i;
        }
        std::size_t j = i;
        while (j < s.size() && !is_ascii_space(s[j])) {
            ++j;
        }
        if (j > i) {
            out.emplace_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() || gold.empty()) {
        return pred.empty() && gold.empty() ? 1.0 : 0.0;
    }
    std::unordered_map<std::string_view, long> counts;
    for (const auto& t : gold) {
        ++counts[t];
    }
    long common = 0;
    for (const auto& t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) {
        return 0.0;
    }
    const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

void fill_aggregates(EvalResult& result) {
    std::vector<double> hits;
    std::vector<double> f1s;
    hits.reserve(result.per_question.size());
    f1s.reserve(result.per_question.size());
    for (const auto& q : result.per_question) {
        hits.push_back(q.hit ? 1.0 : 0.0);
        f1s.push_back(q.f1);
    }
    result.n_questions = result.per_question.size();
    result.acc_at_k = mean(hits);
    result.mean_f1 = mean(f1s);
}

} // namespace

std::string normalize_answer(std::string_view input) {
    std::string cleaned;
    cleaned.reserve(input.size());
    for (char c : input) {
        const auto u = static_cast<unsigned char>(c);
        if (is_ascii_punct(u)) {
            continue;
        }
        cleaned.push_back(u >= 'A' && u <= 'Z' ? static_cast<char>(u - 'A' + 'a') : c);
    }
    std::string out;
    for (const auto& token : split_ws(cleaned)) {
        if (token == "a" || token == "an" || token == "the") {
            continue;
        }
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += token;
    }
    return out;
}

double token_f1(std::string_view prediction, std::span<const std::string> gold_answers) {
    const auto pred = split_ws(normalize_answer(prediction));
    double best = 0.0;
    for (const auto& gold : gold_answers) {
        best = std::max(best, f1_single(pred, split_ws(normalize_answer(gold))));
    }
    return best;
}

bool contains_answer(std::string_view normalized_passage, std::string_view answer) {
    const std::string needle = normalize_answer(answer);
    if (needle.empty()) {
        return false;
    }
    std::string padded;
    padded.reserve(normalized_passage.size() + 2);
    padded += ' ';
    padded += normalized_passage;
    padded += ' ';
    return padded.find(' ' + needle + ' ') != std::string::npos;
}

EvalResult acc_at_k(std::span<const RankedList> retrievals, const Corpus& corpus, std::span<const QAPair> questions,
                    std::size_t k) {
    if (k < 1) {
        throw DataError("k must be >= 1");
    }
    std::unordered_map<std::string_view, const RankedList*> by_question;
    for (const auto& r : retrievals) {
        if (!by_question.emplace(r.question_id, &r).second) {
            throw DataError("duplicate retrieval list for question '" + r.question_id + "'");
        }
    }
    std::unordered_map<std::string, std::string> normalized;
    const auto normalized_text = [&](const std::string& id) -> const std::string& {
        auto it = normalized.find(id);
        if (it == normalized.end()) {
            const Passage* p = corpus.find(id);
            if (!p) {
                throw DataError("retrieved passage '" + id + "' is not in the corpus");
            }
            it = normalized.emplace(id, normalize_answer(p->text)).first;
        }
        return it->second;
    };

    EvalResult result;
    result.k = k;
    result.per_question.reserve(questions.size());
    for (const auto& qa : questions) {
        const auto it = by_question.find(qa.id);
        if (it == by_question.end()) {
            throw DataError("no retrieval list for question '" + qa.id + "'");
        }
        QuestionResult q;
        q.question_id = qa.id;
        q.gold_answers = qa.answers;
        const auto& ids = it->second->passage_ids;
        const std::size_t top = std::min(k, ids.size());
        for (std::size_t r = 0; r < top && !q.hit; ++r) {
            const std::string& text = normalized_text(ids[r]);
            for (const auto& answer : qa.answers) {
                if (contains_answer(text, answer)) {
                    q.hit = true;
                    q.matched_passage_id = ids[r];
                    q.matched_answer = answer;
                    break;
                }
            }
        }
        result.per_question.push_back(std::move(q));
    }
    fill_aggregates(result);
    return result;
}

EvalResult evaluate(std::span<const RankedList> retrievals, const Corpus& corpus, std::span<const QAPair> questions,
                    const std::map<std::string, std::string, std::less<>>& predictions, std::size_t k) {
    EvalResult result = acc_at_k(retrievals, corpus, questions, k);
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto it = predictions.find(questions[i].id);
        if (it == predictions.end()) {
            throw DataError("no prediction for question '" + questions[i].id + "'");
        }
        auto& q = result.per_question[i];
        q.prediction = it->second;
        q.f1 = token_f1(q.prediction, questions[i].answers);
    }
    fill_aggregates(result);
    return result;
}

std::vector<RankedList> oracle_retrievals(std::span<const QAPair> questions) {
    std::vector<RankedList> lists;
    lists.reserve(questions.size());
    for (const auto& qa : questions) {
        lists.push_back({qa.id, qa.gold_passage_ids});
    }
    return lists;
}

double majority_baseline(std::span<const QAPair> boolean_questions) {
    if (boolean_questions.empty()) {
        throw DataError("majority baseline needs at least one question");
    }
    std::size_t yes = 0;
    std::size_t no = 0;
    for (const auto& qa : boolean_questions) {
        if (qa.style != QuestionStyle::Boolean) {
            throw DataError("question '" + qa.id + "' is not a boolean question");
        }
        const std::string label = normalize_answer(qa.answers.front());
        if (label == "yes") {
            ++yes;
        } else if (label == "no") {
            ++no;
        } else {
            throw DataError("question '" + qa.id + "' has non yes/no answer");
        }
    }
    if (yes == no) {
        return 0.5;
    }
    return static_cast<double>(std::max(yes, no)) / static_cast<double>(yes + no);
}

std::vector<AuditCase> audit_false_positives(const EvalResult& result, std::size_t sample_n, double f1_threshold,
                                             std::uint64_t seed) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < result.per_question.size(); ++i) {
        const auto& q = result.per_question[i];
        if (q.hit && q.f1 <= f1_threshold) {
            eligible.push_back(i);
        }
    }
    if (eligible.size() > sample_n) {
        Rng rng(seed);
        for (std::size_t i = 0; i < sample_n; ++i) {
            const std::size_t j = i + rng.below(eligible.size() - i);
            std::swap(eligible[i], eligible[j]);
        }
        eligible.resize(sample_n);
        std::sort(eligible.begin(), eligible.end());
    }
    std::vector<AuditCase> cases;
    cases.reserve(eligible.size());
    for (const std::size_t i : eligible) {
        const auto& q = result.per_question[i];
        cases.push_back({q.question_id, q.matched_answer, q.matched_passage_id, q.prediction, q.f1});
    }
    return cases;
}

// ---------------------------------------------------------------------------
// I/O

std::vector<RankedList> load_retrievals(const std::filesystem::path& path) {
    std::vector<RankedList> lists;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        try {
            const Json j = detail::parse_object(line);
            RankedList list;
            list.question_id = detail::get_string(j, "question_id");
            if (j.contains("passage_ids")) {
                list.passage_ids = detail::get_string_array(j, "passage_ids");
            } else {
                const Json& results = detail::require(j, "results");
                if (!results.is_array()) {
                    throw DataError("field 'results' must be an array");
                }
                for (const auto& r : results) {
                    if (!r.is_object()) {
                        throw DataError("field 'results' entries must be objects");
                    }
                    list.passage_ids.push_back(detail::get_string(r, "passage_id"));
                }
            }
            lists.push_back(std::move(list));
        } catch (const DataError& e) {
            throw DataError(located(path.string(), number, e.what()));
        }
    });
    return lists;
}

std::map<std::string, std::string, std::less<>> load_predictions(const std::filesystem::path& path) {
    std::map<std::string, std::string, std::less<>> predictions;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        try {
            const Json j = detail::parse_object(line);
            auto id = detail::get_string(j, "question_id");
            if (!predictions.emplace(id, detail::get_string(j, "prediction")).second) {
                throw DataError("duplicate prediction for question '" + id + "'");
            }
        } catch (const DataError& e) {
            throw DataError(located(path.string(), number, e.what()));
        }
    });
    return predictions;
}

std::string eval_result_to_json(const EvalResult& result, std::string_view config_json) {
    OrderedJson j;
    OrderedJson config;
    try {
        config = OrderedJson::parse(config_json);
    } catch (const OrderedJson::exception& e) {
        throw DataError(std::string("invalid config echo: ") + e.what());
    }
    j["config"] = std::move(config);
    j["k"] = result.k;
    j["n_questions"] = result.n_questions;
    j["acc_at_k"] = result.acc_at_k;
    j["mean_f1"] = result.mean_f1;
    if (result.majority_baseline) {
        j["majority_baseline"] = *result.majority_baseline;
    }
    auto rows = OrderedJson::array();
    for (const auto& q : result.per_question) {
        OrderedJson row;
        row["question_id"] = q.question_id;
        row["hit"] = q.hit;
        row["f1"] = q.f1;
        row["matched_passage_id"] = q.matched_passage_id;
        row["matched_answer"] = q.matched_answer;
        row["prediction"] = q.prediction;
        row["gold_answers"] = q.gold_answers;
        rows.push_back(std::move(row));
    }
    j["per_question"] = std::move(rows);
    return j.dump(2) + "\n";
}

EvalResult eval_result_from_json(std::string_view text) {
    const Json j = detail::parse_object(text);
    EvalResult result;
    result.k = detail::get_index(j, "k");
    const Json& rows = detail::require(j, "per_question");
    if (!rows.is_array()) {
        throw DataError("field 'per_question' must be an array");
    }
    for (const auto& row : rows) {
        QuestionResult q;
        q.question_id = detail::get_string(row, "question_id");
        const Json& hit = detail::require(row, "hit");
        if (!hit.is_boolean()) {
            throw DataError("field 'hit' must be a boolean");
        }
        q.hit = hit.get<bool>();
        q.f1 = detail::get_number(row, "f1");
        if (q.f1 < 0.0 || q.f1 > 1.0) {
            throw DataError("field 'f1' must lie in [0, 1]");
        }
        q.matched_passage_id = detail::get_string(row, "matched_passage_id");
        q.matched_answer = detail::get_string(row, "matched_answer");
        q.prediction = detail::get_string(row, "prediction");
        q.gold_answers = detail::get_string_array(row, "gold_answers");
        result.per_question.push_back(std::move(q));
    }
    fill_aggregates(result);
    if (j.contains("majority_baseline")) {
        result.majority_baseline = detail::get_number(j, "majority_baseline");
    }
    const double stored_acc = detail::get_number(j, "acc_at_k");
    const double stored_f1 = detail::get_number(j, "mean_f1");
    if (std::abs(stored_acc - result.acc_at_k) > 1e-12 || std::abs(stored_f1 - result.mean_f1) > 1e-12 ||
        detail::get_index(j, "n_questions") != result.n_questions) {
        throw DataError("aggregates do not match per-question entries");
    }
    return result;
}

std::string to_jsonl(const AuditCase& c) {
    OrderedJson j;
    j["question_id"] = c.question_id;
    j["answer"] = c.answer;
    j["matched_passage_id"] = c.matched_passage_id;
    j["prediction"] = c.prediction;
    j["f1"] = c.f1;
    return detail::dump(j);
}

} // namespace shiftlab::eval
