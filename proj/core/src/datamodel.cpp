#include "shiftlab/datamodel.hpp"

#include "json_codec.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/evaluation.hpp"
#include "shiftlab/io.hpp"
#include "shiftlab/text.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

namespace shiftlab {

using detail::Json;
using detail::OrderedJson;

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && is_space(s[i])) {
        ++i;
    }
    return i;
}

template <class Fn>
auto with_line(const std::filesystem::path& path, std::size_t line, Fn&& fn) {
    try {
        return fn();
    } catch (const DataError& e) {
        throw DataError(located(path.string(), line, e.what()));
    }
}

} // namespace

std::string span_text(std::string_view text, Span span) {
    const auto b = text::byte_offset(text, span.begin);
    const auto e = text::byte_offset(text, span.end);
    if (!b || !e || *b > *e) {
        throw DataError("span [" + std::to_string(span.begin) + "," + std::to_string(span.end) +
                        ") outside text");
    }
    return std::string(text.substr(*b, *e - *b));
}

std::vector<Span> split_sentences(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> bytes;
    std::size_t start = skip_space(text, 0);
    for (std::size_t i = start; i < text.size(); ++i) {
        if (!is_terminator(text[i]) || i < start) {
            continue;
        }
        const std::size_t end = i + 1;
        bool boundary = false;
        if (end == text.size()) {
            boundary = true;
        } else if (is_space(text[end])) {
            const std::size_t next = skip_space(text, end);
            boundary = next == text.size() || (text[next] >= 'A' && text[next] <= 'Z');
        }
        if (boundary && text::codepoint_length(text.substr(start, end - start)) >= 3) {
            bytes.emplace_back(start, end);
            start = skip_space(text, end);
        }
    }
    std::size_t tail_end = text.size();
    while (tail_end > start && is_space(text[tail_end - 1])) {
        --tail_end;
    }
    if (start < tail_end) {
        bytes.emplace_back(start, tail_end);
    }

    std::vector<Span> spans;
    spans.reserve(bytes.size());
    std::size_t cursor_byte = 0;
    std::size_t cursor_cp = 0;
    const auto advance = [&](std::size_t to) {
        cursor_cp += text::codepoint_length(text.substr(cursor_byte, to - cursor_byte));
        cursor_byte = to;
        return cursor_cp;
    };
    for (const auto& [b, e] : bytes) {
        const std::size_t cb = advance(b);
        const std::size_t ce = advance(e);
        spans.push_back({cb, ce});
    }
    return spans;
}

std::string_view to_string(QuestionStyle style) {
    switch (style) {
    case QuestionStyle::Natural:
        return "natural";
    case QuestionStyle::Cloze:
        return "cloze";
    case QuestionStyle::Boolean:
        return "boolean";
    }
    return "natural";
}

QuestionStyle question_style_from_string(std::string_view s) {
    if (s == "natural") {
        return QuestionStyle::Natural;
    }
    if (s == "cloze") {
        return QuestionStyle::Cloze;
    }
    if (s == "boolean") {
        return QuestionStyle::Boolean;
    }
    throw DataError("unknown style '" + std::string(s) + "' (expected natural, cloze or boolean)");
}

std::string_view to_string(ShiftLabel label) {
    switch (label) {
    case ShiftLabel::NoShift:
        return "No";
    case ShiftLabel::LabelShift:
        return "Label";
    case ShiftLabel::CovariateShift:
        return "Covariate";
    case ShiftLabel::FullShift:
        return "Full";
    }
    return "No";
}

ShiftLabel shift_label_from_string(std::string_view s) {
    for (auto l : {ShiftLabel::NoShift, ShiftLabel::LabelShift, ShiftLabel::CovariateShift,
                   ShiftLabel::FullShift}) {
        if (to_string(l) == s) {
            return l;
        }
    }
    throw DataError("unknown shift label '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Validation

void validate(const Passage& p) {
    if (p.id.empty()) {
        throw DataError("field 'id' must be non-empty");
    }
    const std::size_t length = text::codepoint_length(p.text);
    std::size_t previous_end = 0;
    for (std::size_t i = 0; i < p.sentences.size(); ++i) {
        const Span& s = p.sentences[i];
        const std::string where = "field 'sentences'[" + std::to_string(i) + "]";
        if (s.begin >= s.end) {
            throw DataError(where + " is empty or reversed");
        }
        if (s.begin < previous_end) {
            throw DataError(where + " overlaps or precedes the previous sentence");
        }
        if (s.end > length) {
            throw DataError(where + " exceeds text length " + std::to_string(length));
        }
        previous_end = s.end;
    }
}

void validate(const QAPair& qa) {
    if (qa.id.empty()) {
        throw DataError("field 'id' must be non-empty");
    }
    if (qa.answers.empty()) {
        throw DataError("field 'answers' must be non-empty");
    }
    for (std::size_t i = 0; i < qa.answers.size(); ++i) {
        if (text::is_blank(qa.answers[i])) {
            throw DataError("field 'answers'[" + std::to_string(i) + "] is blank");
        }
    }
    if (qa.style == QuestionStyle::Boolean) {
        for (const auto& a : qa.answers) {
            const std::string n = eval::normalize_answer(a);
            if (n != "yes" && n != "no") {
                throw DataError("boolean question '" + qa.id + "' has non yes/no answer '" + a + "'");
            }
        }
    }
}

void validate(const EntityMention& m) {
    if (m.surface.empty() || text::is_blank(m.surface)) {
        throw DataError("field 'surface' must be non-empty");
    }
    if (m.entity_type.empty()) {
        throw DataError("field 'entity_type' must be non-empty");
    }
    if (m.frequency < 1) {
        throw DataError("field 'frequency' must be >= 1");
    }
}

void validate(const ScoreMatrix& sm) {
    const std::size_t k = sm.energies.size();
    if (sm.candidate_ids.size() != k) {
        throw DataError("'candidate_ids' has " + std::to_string(sm.candidate_ids.size()) +
                        " entries but 'energies' has " + std::to_string(k));
    }
    if (k < 2) {
        throw DataError("score matrix needs at least 2 candidates, got " + std::to_string(k));
    }
    if (sm.gold_index >= k) {
        throw DataError("field 'gold_index' = " + std::to_string(sm.gold_index) +
                        " out of range for K = " + std::to_string(k));
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!std::isfinite(sm.energies[i])) {
            throw DataError("field 'energies'[" + std::to_string(i) + "] must be finite");
        }
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& id : sm.candidate_ids) {
        if (!seen.insert(id).second) {
            throw DataError("duplicate candidate id '" + id + "'");
        }
    }
}

void validate(const AnswerLikelihoodRecord& rec) {
    const std::size_t k = rec.candidates.size();
    if (k < 1) {
        throw DataError("field 'candidates' must be non-empty");
    }
    if (rec.token_logprobs.size() != k) {
        throw DataError("'token_logprobs' has " + std::to_string(rec.token_logprobs.size()) +
                        " entries but 'candidates' has " + std::to_string(k));
    }
    if (rec.gold_index >= k) {
        throw DataError("field 'gold_index' = " + std::to_string(rec.gold_index) +
                        " out of range for K = " + std::to_string(k));
    }
    for (std::size_t i = 0; i < k; ++i) {
        const auto& tokens = rec.token_logprobs[i];
        if (tokens.empty()) {
            throw DataError("field 'token_logprobs'[" + std::to_string(i) + "] is empty");
        }
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (!std::isfinite(tokens[t]) || tokens[t] > 0.0) {
                throw DataError("field 'token_logprobs'[" + std::to_string(i) + "][" + std::to_string(t) +
                                "] must be finite and <= 0");
            }
        }
    }
}

void validate(const ShiftStatistics& s) {
    const std::pair<const char*, double> fields[] = {
        {"retriever_stat", s.retriever_stat}, {"reader_stat", s.reader_stat},
        {"d_u_t", s.d_u_t},                   {"d_g_t", s.d_g_t},
        {"d_u_r", s.d_u_r},                   {"reader_d_u_t", s.reader_d_u_t},
    };
    for (const auto& [name, value] : fields) {
        if (!std::isfinite(value)) {
            throw DataError(std::string("statistic '") + name + "' is not finite");
        }
    }
    for (const auto& [name, value] : std::span(fields).subspan(2)) {
        if (value < 0.0) {
            throw DataError(std::string("distance '") + name + "' is negative");
        }
    }
    if (s.n_examples < 1) {
        throw DataError("statistic 'n_examples' must be >= 1");
    }
}

// ---------------------------------------------------------------------------
// Collections

EntityCatalog::EntityCatalog(std::vector<EntityMention> mentions) : mentions_(std::move(mentions)) {
    if (mentions_.empty()) {
        throw DataError("entity catalog is empty");
    }
    std::set<std::pair<std::string_view, std::string_view>> seen;
    for (std::size_t i = 0; i < mentions_.size(); ++i) {
        const auto& m = mentions_[i];
        validate(m);
        if (!seen.emplace(m.surface, m.entity_type).second) {
            throw DataError("duplicate entity ('" + m.surface + "', '" + m.entity_type + "')");
        }
        type_totals_[m.entity_type] += m.frequency;
        by_type_[m.entity_type].push_back(i);
    }
    for (const auto& [type, total] : type_totals_) {
        types_.push_back(type);
    }
}

std::span<const std::size_t> EntityCatalog::mentions_of_type(std::string_view type) const {
    const auto it = by_type_.find(type);
    if (it == by_type_.end()) {
        return {};
    }
    return it->second;
}

Corpus::Corpus(std::vector<Passage> passages) : passages_(std::move(passages)) {
    by_id_.reserve(passages_.size());
    for (std::size_t i = 0; i < passages_.size(); ++i) {
        if (!by_id_.emplace(passages_[i].id, i).second) {
            throw DataError("duplicate passage id '" + passages_[i].id + "'");
        }
    }
}

const Passage* Corpus::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &passages_[it->second];
}

void check_gold_links(std::span<const QAPair> pairs, const Corpus& corpus) {
    for (const auto& qa : pairs) {
        for (const auto& id : qa.gold_passage_ids) {
            if (!corpus.find(id)) {
                throw DataError("question '" + qa.id + "' references unknown gold passage '" + id + "'");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// JSONL codecs

std::string to_jsonl(const Passage& p) {
    OrderedJson j;
    j["id"] = p.id;
    j["corpus_id"] = p.corpus_id;
    j["text"] = p.text;
    auto spans = OrderedJson::array();
    for (const auto& s : p.sentences) {
        spans.push_back({s.begin, s.end});
    }
    j["sentences"] = std::move(spans);
    return detail::dump(j);
}

std::string to_jsonl(const QAPair& qa) {
    OrderedJson j;
    j["id"] = qa.id;
    j["question"] = qa.question;
    j["answers"] = qa.answers;
    j["gold_passage_ids"] = qa.gold_passage_ids;
    j["style"] = std::string(to_string(qa.style));
    return detail::dump(j);
}

std::string to_jsonl(const EntityMention& m) {
    OrderedJson j;
    j["surface"] = m.surface;
    j["entity_type"] = m.entity_type;
    j["frequency"] = m.frequency;
    return detail::dump(j);
}

std::string to_jsonl(const ScoreMatrix& sm) {
    OrderedJson j;
    j["question_id"] = sm.question_id;
    j["gold_index"] = sm.gold_index;
    j["candidate_ids"] = sm.candidate_ids;
    j["energies"] = sm.energies;
    return detail::dump(j);
}

std::string to_jsonl(const AnswerLikelihoodRecord& rec) {
    OrderedJson j;
    j["question_id"] = rec.question_id;
    j["gold_index"] = rec.gold_index;
    j["candidates"] = rec.candidates;
    j["token_logprobs"] = rec.token_logprobs;
    return detail::dump(j);
}

Passage parse_passage(std::string_view line) {
    const Json j = detail::parse_object(line);
    Passage p;
    p.id = detail::get_string(j, "id");
    p.corpus_id = j.contains("corpus_id") ? detail::get_string(j, "corpus_id") : std::string();
    p.text = detail::get_string(j, "text");
    const auto it = j.find("sentences");
    if (it == j.end() || it->is_null()) {
        p.sentences = split_sentences(p.text);
    } else {
        if (!it->is_array()) {
            throw DataError("field 'sentences' must be an array of [start,end] pairs");
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            const Json& pair = (*it)[i];
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() ||
                !pair[1].is_number_unsigned()) {
                throw DataError("field 'sentences'[" + std::to_string(i) +
                                "] must be a pair of non-negative integers");
            }
            p.sentences.push_back({pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
        }
    }
    validate(p);
    return p;
}

QAPair parse_qa_pair(std::string_view line) {
    const Json j = detail::parse_object(line);
    QAPair qa;
    qa.id = detail::get_string(j, "id");
    qa.question = detail::get_string(j, "question");
    qa.answers = detail::get_string_array(j, "answers");
    if (j.contains("gold_passage_ids") && !j["gold_passage_ids"].is_null()) {
        qa.gold_passage_ids = detail::get_string_array(j, "gold_passage_ids");
    }
    if (j.contains("style")) {
        qa.style = question_style_from_string(detail::get_string(j, "style"));
    }
    validate(qa);
    return qa;
}

EntityMention parse_entity_mention(std::string_view line) {
    const Json j = detail::parse_object(line);
    EntityMention m;
    m.surface = detail::get_string(j, "surface");
    m.entity_type = detail::get_string(j, "entity_type");
    const Json& f = detail::require(j, "frequency");
    if (!f.is_number_unsigned()) {
        throw DataError("field 'frequency' must be a positive integer");
    }
    m.frequency = f.get<std::uint64_t>();
    validate(m);
    return m;
}

ScoreMatrix parse_score_matrix(std::string_view line) {
    const Json j = detail::parse_object(line);
    ScoreMatrix sm;
    sm.question_id = detail::get_string(j, "question_id");
    sm.gold_index = detail::get_index(j, "gold_index");
    sm.candidate_ids = detail::get_string_array(j, "candidate_ids");
    sm.energies = detail::get_number_array(j, "energies");
    validate(sm);
    return sm;
}

AnswerLikelihoodRecord parse_answer_likelihood(std::string_view line) {
    const Json j = detail::parse_object(line);
    AnswerLikelihoodRecord rec;
    rec.question_id = detail::get_string(j, "question_id");
    rec.gold_index = detail::get_index(j, "gold_index");
    rec.candidates = detail::get_string_array(j, "candidates");
    const Json& lp = detail::require(j, "token_logprobs");
    if (!lp.is_array()) {
        throw DataError("field 'token_logprobs' must be an array of arrays");
    }
    for (std::size_t i = 0; i < lp.size(); ++i) {
        if (!lp[i].is_array()) {
            throw DataError("field 'token_logprobs'[" + std::to_string(i) + "] must be an array");
        }
        std::vector<double> tokens;
        tokens.reserve(lp[i].size());
        for (std::size_t t = 0; t < lp[i].size(); ++t) {
            tokens.push_back(detail::get_finite(
                lp[i][t], "'token_logprobs'[" + std::to_string(i) + "][" + std::to_string(t) + "]"));
        }
        rec.token_logprobs.push_back(std::move(tokens));
    }
    validate(rec);
    return rec;
}

// ---------------------------------------------------------------------------
// Loaders

namespace {

template <class Record, class Parse>
std::vector<Record> load_records(const std::filesystem::path& path, Parse parse) {
    std::vector<Record> out;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        out.push_back(with_line(path, number, [&] { return parse(line); }));
    });
    return out;
}

} // namespace

Corpus load_corpus(const std::filesystem::path& path) {
    std::vector<Passage> passages;
    std::unordered_map<std::string, std::size_t> first_line;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        Passage p = with_line(path, number, [&] { return parse_passage(line); });
        const auto [it, inserted] = first_line.emplace(p.id, number);
        if (!inserted) {
            throw DataError(located(path.string(), number,
                                    "duplicate passage id '" + p.id + "' (first seen on line " +
                                        std::to_string(it->second) + ")"));
        }
        passages.push_back(std::move(p));
    });
    return Corpus(std::move(passages));
}

std::vector<QAPair> load_qa_pairs(const std::filesystem::path& path) {
    std::vector<QAPair> pairs;
    std::unordered_map<std::string, std::size_t> first_line;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        QAPair qa = with_line(path, number, [&] { return parse_qa_pair(line); });
        if (!first_line.emplace(qa.id, number).second) {
            throw DataError(located(path.string(), number, "duplicate question id '" + qa.id + "'"));
        }
        pairs.push_back(std::move(qa));
    });
    return pairs;
}

EntityCatalog load_entities(const std::filesystem::path& path) {
    auto mentions = load_records<EntityMention>(path, parse_entity_mention);
    try {
        return EntityCatalog(std::move(mentions));
    } catch (const DataError& e) {
        throw DataError(located(path.string(), 0, e.what()));
    }
}

std::vector<ScoreMatrix> load_score_matrices(const std::filesystem::path& path) {
    return load_records<ScoreMatrix>(path, parse_score_matrix);
}

std::vector<AnswerLikelihoodRecord> load_answer_likelihoods(const std::filesystem::path& path) {
    return load_records<AnswerLikelihoodRecord>(path, parse_answer_likelihood);
}

} // namespace shiftlab
