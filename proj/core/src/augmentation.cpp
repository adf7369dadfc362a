#include "shiftlab/augmentation.hpp"

#include "json_codec.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/io.hpp"
#include "shiftlab/parallel.hpp"
#include "shiftlab/random.hpp"
#include "shiftlab/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace shiftlab::augment {

using detail::Json;

std::string_view to_string(SamplingStrategy::Kind kind) {
    switch (kind) {
    case SamplingStrategy::Kind::MostFrequent:
        return "most-frequent";
    case SamplingStrategy::Kind::UniformOverTypes:
        return "uniform-over-types";
    case SamplingStrategy::Kind::Random:
        return "random";
    case SamplingStrategy::Kind::ProportionalToTarget:
        return "proportional";
    }
    return "uniform-over-types";
}

SamplingStrategy::Kind sampling_kind_from_string(std::string_view s) {
    for (auto k : {SamplingStrategy::Kind::MostFrequent, SamplingStrategy::Kind::UniformOverTypes,
                   SamplingStrategy::Kind::Random, SamplingStrategy::Kind::ProportionalToTarget}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw DataError("unknown sampling strategy '" + std::string(s) +
                    "' (expected most-frequent, uniform-over-types, random or proportional)");
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

void check_target(const EntityCatalog& catalog, const std::map<std::string, double>& target) {
    if (target.empty()) {
        throw DataError("proportional sampling needs a target type distribution");
    }
    double total = 0.0;
    for (const auto& [type, p] : target) {
        if (!std::isfinite(p) || p < 0.0) {
            throw DataError("target probability for type '" + type + "' must be finite and >= 0");
        }
        if (catalog.mentions_of_type(type).empty()) {
            throw DataError("target distribution names type '" + type + "' which is absent from the catalog");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw DataError("target type distribution sums to " + std::to_string(total) + ", expected 1");
    }
}

} // namespace

std::vector<SampledAnswer> sample_answers(const EntityCatalog& catalog, const SamplingStrategy& strategy, std::size_t n,
                                          std::uint64_t seed) {
    if (n < 1) {
        throw DataError("number of answers to sample must be >= 1");
    }
    const auto& mentions = catalog.mentions();
    std::vector<SampledAnswer> out;
    out.reserve(n);
    const auto emit = [&](std::size_t i) { out.push_back({mentions[i].surface, mentions[i].entity_type}); };

    switch (strategy.kind) {
    case SamplingStrategy::Kind::MostFrequent: {
        std::vector<std::size_t> order(mentions.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& x = mentions[a];
            const auto& y = mentions[b];
            if (x.frequency != y.frequency) {
                return x.frequency > y.frequency;
            }
            return x.surface != y.surface ? x.surface < y.surface : x.entity_type < y.entity_type;
        });
        for (std::size_t i = 0; i < n; ++i) {
            emit(order[i % order.size()]);
        }
        break;
    }
    case SamplingStrategy::Kind::UniformOverTypes: {
        Rng rng(seed);
        const auto& types = catalog.types();
        for (std::size_t i = 0; i < n; ++i) {
            const auto members = catalog.mentions_of_type(types[rng.below(types.size())]);
            emit(members[rng.below(members.size())]);
        }
        break;
    }
    case SamplingStrategy::Kind::Random: {
        Rng rng(seed);
        for (std::size_t i = 0; i < n; ++i) {
            emit(rng.below(mentions.size()));
        }
        break;
    }
    case SamplingStrategy::Kind::ProportionalToTarget: {
        check_target(catalog, strategy.target_type_distribution);
        std::vector<std::pair<std::string_view, double>> cumulative;
        double running = 0.0;
        for (const auto& [type, p] : strategy.target_type_distribution) {
            if (p > 0.0) {
                running += p;
                cumulative.emplace_back(type, running);
            }
        }
        Rng rng(seed);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.unit() * running;
            auto it = std::find_if(cumulative.begin(), cumulative.end(),
                                   [u](const auto& entry) { return u < entry.second; });
            if (it == cumulative.end()) {
                it = std::prev(cumulative.end());
            }
            const auto members = catalog.mentions_of_type(it->first);
            emit(members[rng.below(members.size())]);
        }
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cloze

std::string reconstruct_sentence(const ClozeExample& example, std::string_view sentinel) {
    std::string out;
    std::string_view rest = example.question;
    std::size_t pos = 0;
    while ((pos = rest.find(sentinel)) != std::string_view::npos) {
        out += rest.substr(0, pos);
        out += example.answer;
        rest.remove_prefix(pos + sentinel.size());
    }
    out += rest;
    return out;
}

ClozeExample make_cloze(std::string_view sentence, std::string_view answer, std::string_view sentinel) {
    if (sentinel.empty()) {
        throw DataError("sentinel must be non-empty");
    }
    if (text::is_blank(answer)) {
        throw DataError("answer must be non-empty");
    }
    const auto hits = text::find_word_occurrences(sentence, answer);
    if (hits.empty()) {
        throw DataError("answer '" + std::string(answer) + "' does not occur in the sentence");
    }
    if (sentence.find(sentinel) != std::string_view::npos) {
        throw DataError("sentence already contains the sentinel");
    }
    const std::string_view surface = sentence.substr(hits.front(), answer.size());
    ClozeExample example;
    example.answer = std::string(surface);
    std::size_t cursor = 0;
    bool has_context = false;
    for (const std::size_t hit : hits) {
        if (sentence.substr(hit, answer.size()) != surface) {
            throw DataError("answer occurs with differing surface forms");
        }
        const auto between = sentence.substr(cursor, hit - cursor);
        has_context = has_context || std::any_of(between.begin(), between.end(), [](char c) {
                          return text::is_word_byte(static_cast<unsigned char>(c));
                      });
        example.question += between;
        example.question += sentinel;
        cursor = hit + answer.size();
    }
    const auto tail = sentence.substr(cursor);
    has_context = has_context || std::any_of(tail.begin(), tail.end(), [](char c) {
                      return text::is_word_byte(static_cast<unsigned char>(c));
                  });
    example.question += tail;
    if (!has_context) {
        throw DataError("answer covers the whole sentence");
    }
    if (text::case_fold(example.question).find(text::case_fold(answer)) != std::string::npos) {
        throw DataError("masked question still contains the answer");
    }
    if (reconstruct_sentence(example, sentinel) != sentence) {
        throw DataError("masked question does not reconstruct the sentence");
    }
    return example;
}

ClozeDataset generate_cloze_dataset(const EntityCatalog& catalog, const SamplingStrategy& strategy, std::size_t n,
                                    const bm25::SentenceIndex& sentences, std::uint64_t seed, std::string_view sentinel,
                                    std::size_t workers) {
    const auto sampled = sample_answers(catalog, strategy, n, seed);

    // Alignment depends only on the surface, so each distinct answer is
    // resolved once.
    std::vector<std::string_view> distinct;
    std::unordered_map<std::string_view, std::size_t> slot;
    for (const auto& a : sampled) {
        if (slot.emplace(a.surface, distinct.size()).second) {
            distinct.push_back(a.surface);
        }
    }
    enum class Outcome { Emitted, Absent, Unusable };
    std::vector<std::pair<Outcome, ClozeExample>> resolved(distinct.size());
    parallel_for(distinct.size(), workers, [&](std::size_t i) {
        const std::string answer(distinct[i]);
        const auto query = bm25::tokenize(answer);
        const std::string answers[] = {answer};
        const auto match = bm25::best_sentence_containing(sentences, query, answers);
        if (!match) {
            resolved[i].first = Outcome::Absent;
            return;
        }
        try {
            ClozeExample ex = make_cloze(match->text, answer, sentinel);
            ex.source_passage_id = match->passage_id;
            ex.sentence_span = match->span;
            resolved[i] = {Outcome::Emitted, std::move(ex)};
        } catch (const DataError&) {
            resolved[i].first = Outcome::Unusable;
        }
    });

    ClozeDataset out;
    out.stats.requested = sampled.size();
    for (const auto& a : sampled) {
        const auto& [outcome, example] = resolved[slot.at(a.surface)];
        switch (outcome) {
        case Outcome::Emitted:
            out.examples.push_back(example);
            ++out.stats.emitted;
            break;
        case Outcome::Absent:
            ++out.stats.skipped_absent;
            break;
        case Outcome::Unusable:
            ++out.stats.skipped_unusable;
            break;
        }
    }
    if (out.examples.empty()) {
        throw DataError("no cloze examples produced: " + std::to_string(out.stats.requested) + " requested, " +
                        std::to_string(out.stats.skipped_absent) + " absent from the corpus, " +
                        std::to_string(out.stats.skipped_unusable) + " unusable");
    }
    return out;
}

std::vector<QAPair> to_qa_pairs(std::span<const ClozeExample> examples, std::string_view id_prefix) {
    std::vector<QAPair> pairs;
    pairs.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        QAPair qa;
        qa.id = std::string(id_prefix) + std::to_string(i);
        qa.question = examples[i].question;
        qa.answers = {examples[i].answer};
        if (!examples[i].source_passage_id.empty()) {
            qa.gold_passage_ids = {examples[i].source_passage_id};
        }
        qa.style = QuestionStyle::Cloze;
        pairs.push_back(std::move(qa));
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// QGen ingestion

QgenIngest ingest_qgen_records(std::span<const QgenRecord> records, const Corpus& corpus) {
    QgenIngest out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const Passage* passage = corpus.find(r.passage_id);
        if (!passage) {
            ++out.dropped_unknown_passage;
            continue;
        }
        if (text::is_blank(r.answer) || !text::contains_word_sequence(passage->text, r.answer)) {
            ++out.dropped_missing_answer;
            continue;
        }
        QAPair qa;
        qa.id = r.id.empty() ? "qgen-" + std::to_string(i) : r.id;
        qa.question = r.question;
        qa.answers = {r.answer};
        qa.gold_passage_ids = {r.passage_id};
        qa.style = QuestionStyle::Natural;
        validate(qa);
        out.pairs.push_back(std::move(qa));
    }
    return out;
}

QgenIngest ingest_qgen_pairs(const std::filesystem::path& path, const Corpus& corpus) {
    std::vector<QgenRecord> records;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        try {
            const Json j = detail::parse_object(line);
            QgenRecord r;
            if (j.contains("id")) {
                r.id = detail::get_string(j, "id");
            }
            r.question = detail::get_string(j, "question");
            r.answer = detail::get_string(j, "answer");
            r.passage_id = detail::get_string(j, "passage_id");
            records.push_back(std::move(r));
        } catch (const DataError& e) {
            throw DataError(located(path.string(), number, e.what()));
        }
    });
    return ingest_qgen_records(records, corpus);
}

// ---------------------------------------------------------------------------
// Few-shot filter

std::string_view to_string(FilterReason reason) {
    switch (reason) {
    case FilterReason::ContainsNumber:
        return "contains_number";
    case FilterReason::NoVerbatimSpan:
        return "no_verbatim_span";
    case FilterReason::LowOverlap:
        return "low_overlap";
    case FilterReason::Passed:
        return "passed";
    }
    return "passed";
}

const std::set<std::string, std::less<>>& stopwords() {
    // Version 1 of the embedded list. Changing it changes filter verdicts.
    static const std::set<std::string, std::less<>> words = {
        "a",       "about",   "above",  "after",  "again",   "against", "all",     "am",     "an",
        "and",     "any",     "are",    "as",     "at",      "be",      "because", "been",   "before",
        "being",   "below",   "between", "both",  "but",     "by",      "can",     "could",  "did",
        "do",      "does",    "doing",  "down",   "during",  "each",    "few",     "for",    "from",
        "further", "had",     "has",    "have",   "having",  "he",      "her",     "here",   "hers",
        "herself", "him",     "himself", "his",   "how",     "i",       "if",      "in",     "into",
        "is",      "it",      "its",    "itself", "just",    "me",      "more",    "most",   "my",
        "myself",  "no",      "nor",    "not",    "now",     "of",      "off",     "on",     "once",
        "only",    "or",      "other",  "our",    "ours",    "ourselves", "out",   "over",   "own",
        "s",       "same",    "she",    "should", "so",      "some",    "such",    "t",      "than",
        "that",    "the",     "their",  "theirs", "them",    "themselves", "then", "there",  "these",
        "they",    "this",    "those",  "through", "to",     "too",     "under",   "until",  "up",
        "very",    "was",     "we",     "were",   "what",    "when",    "where",   "which",  "while",
        "who",     "whom",    "why",    "will",   "with",    "would",   "you",     "your",   "yours",
        "yourself", "yourselves",
    };
    return words;
}

namespace {

std::unordered_set<std::string> content_words(const std::vector<std::string>& tokens) {
    std::unordered_set<std::string> words;
    for (const auto& t : tokens) {
        if (!stopwords().contains(t)) {
            words.insert(t);
        }
    }
    return words;
}

bool shares_span(const std::vector<std::string>& generated, const std::vector<std::string>& passage,
                 std::size_t span) {
    if (span == 0) {
        return true;
    }
    if (generated.size() < span || passage.size() < span) {
        return false;
    }
    const auto key = [span](const std::vector<std::string>& tokens, std::size_t start) {
        std::string k;
        for (std::size_t i = start; i < start + span; ++i) {
            k += tokens[i];
            k += '\x1f';
        }
        return k;
    };
    std::unordered_set<std::string> grams;
    for (std::size_t i = 0; i + span <= passage.size(); ++i) {
        grams.insert(key(passage, i));
    }
    for (std::size_t i = 0; i + span <= generated.size(); ++i) {
        if (grams.contains(key(generated, i))) {
            return true;
        }
    }
    return false;
}

} // namespace

FilterVerdict fewshot_filter(std::string_view passage, std::string_view generated, const FilterOptions& options) {
    const auto gen_tokens = bm25::tokenize(generated);
    const auto passage_tokens = bm25::tokenize(passage);

    FilterVerdict verdict;
    const auto gen_words = content_words(gen_tokens);
    const auto passage_words = content_words(passage_tokens);
    if (!gen_words.empty()) {
        std::size_t shared = 0;
        for (const auto& w : gen_words) {
            shared += passage_words.contains(w) ? 1 : 0;
        }
        verdict.overlap = static_cast<double>(shared) / static_cast<double>(gen_words.size());
    }

    if (std::any_of(generated.begin(), generated.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        verdict.reason = FilterReason::ContainsNumber;
    } else if (!shares_span(gen_tokens, passage_tokens, options.min_span)) {
        verdict.reason = FilterReason::NoVerbatimSpan;
    } else if (verdict.overlap < options.min_overlap) {
        verdict.reason = FilterReason::LowOverlap;
    } else {
        verdict.reason = FilterReason::Passed;
    }
    verdict.accepted = verdict.reason == FilterReason::Passed;
    return verdict;
}

std::optional<ClozeExample> cloze_from_generated(std::string_view passage, std::string_view generated,
                                                 const EntityCatalog& catalog, std::string_view sentinel,
                                                 const FilterOptions& options) {
    if (!fewshot_filter(passage, generated, options).accepted) {
        return std::nullopt;
    }
    const auto gen_tokens = bm25::tokenize(generated);
    const std::unordered_set<std::string> present(gen_tokens.begin(), gen_tokens.end());
    std::vector<const EntityMention*> found;
    for (const auto& m : catalog.mentions()) {
        const auto tokens = bm25::tokenize(m.surface);
        const bool plausible = std::all_of(tokens.begin(), tokens.end(),
                                           [&](const std::string& t) { return present.contains(t); });
        if (plausible && text::contains_word_sequence(generated, m.surface)) {
            found.push_back(&m);
        }
    }
    std::sort(found.begin(), found.end(), [](const EntityMention* a, const EntityMention* b) {
        if (a->frequency != b->frequency) {
            return a->frequency > b->frequency;
        }
        return a->surface != b->surface ? a->surface < b->surface : a->entity_type < b->entity_type;
    });
    for (const EntityMention* m : found) {
        try {
            return make_cloze(generated, m->surface, sentinel);
        } catch (const DataError&) {
            continue;
        }
    }
    return std::nullopt;
}

std::vector<Generation> load_generations(const std::filesystem::path& path) {
    std::vector<Generation> out;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        try {
            const Json j = detail::parse_object(line);
            out.push_back({detail::get_string(j, "passage_id"), detail::get_string(j, "generation")});
        } catch (const DataError& e) {
            throw DataError(located(path.string(), number, e.what()));
        }
    });
    return out;
}

} // namespace shiftlab::augment
