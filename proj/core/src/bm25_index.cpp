#include "shiftlab/bm25_index.hpp"

#include "json_codec.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/io.hpp"
#include "shiftlab/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace shiftlab::bm25 {

using detail::Json;
using detail::OrderedJson;

std::vector<std::string> tokenize(std::string_view input) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : input) {
        if (text::is_word_byte(static_cast<unsigned char>(c))) {
            current.push_back(text::fold(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

namespace {

void check_params(const Params& p) {
    if (!(p.k1 > 0.0) || !std::isfinite(p.k1)) {
        throw DataError("BM25 k1 must be a positive finite number");
    }
    if (!(p.b >= 0.0 && p.b <= 1.0)) {
        throw DataError("BM25 b must lie in [0, 1]");
    }
}

std::vector<std::string> unique_sorted(std::span<const std::string> tokens) {
    std::vector<std::string> out(tokens.begin(), tokens.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double term_weight(const InvertedIndex& index, double idf, std::uint32_t tf, std::uint32_t length) {
    const auto& p = index.params();
    const double norm = p.k1 * (1.0 - p.b + p.b * static_cast<double>(length) / index.avg_doc_len());
    return idf * static_cast<double>(tf) * (p.k1 + 1.0) / (static_cast<double>(tf) + norm);
}

// Scores one document against query terms that are already unique and sorted.
double score_doc(const InvertedIndex& index, std::span<const std::string> terms, std::uint32_t doc) {
    double score = 0.0;
    const std::uint32_t length = index.documents()[doc].length;
    for (const auto& term : terms) {
        const auto list = index.postings(term);
        const auto it = std::lower_bound(list.begin(), list.end(), doc,
                                         [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        if (it != list.end() && it->doc == doc) {
            score += term_weight(index, index.idf(term), it->tf, length);
        }
    }
    return score;
}

} // namespace

// ---------------------------------------------------------------------------
// InvertedIndex

InvertedIndex InvertedIndex::build(std::vector<std::pair<std::string, std::string>> docs, Params params,
                                   std::optional<std::size_t> min_len_filter) {
    check_params(params);
    struct Tokenized {
        std::string id;
        std::vector<std::string> tokens;
    };
    std::vector<Tokenized> kept;
    kept.reserve(docs.size());
    for (auto& [id, body] : docs) {
        auto tokens = tokenize(body);
        if (min_len_filter && tokens.size() < *min_len_filter) {
            continue;
        }
        kept.push_back({std::move(id), std::move(tokens)});
    }
    if (kept.empty()) {
        throw DataError("no documents left to index" +
                        (min_len_filter ? " after the minimum length filter of " + std::to_string(*min_len_filter) +
                                              " tokens"
                                        : std::string()));
    }
    std::sort(kept.begin(), kept.end(), [](const Tokenized& a, const Tokenized& b) { return a.id < b.id; });

    std::vector<Document> documents;
    std::unordered_map<std::string, std::vector<Posting>> postings;
    documents.reserve(kept.size());
    for (std::size_t d = 0; d < kept.size(); ++d) {
        if (d > 0 && kept[d].id == kept[d - 1].id) {
            throw DataError("duplicate document id '" + kept[d].id + "'");
        }
        std::map<std::string_view, std::uint32_t> counts;
        for (const auto& t : kept[d].tokens) {
            ++counts[t];
        }
        for (const auto& [term, tf] : counts) {
            postings[std::string(term)].push_back({static_cast<std::uint32_t>(d), tf});
        }
        documents.push_back({kept[d].id, static_cast<std::uint32_t>(kept[d].tokens.size())});
    }
    return assemble(params, min_len_filter, std::move(documents), std::move(postings));
}

InvertedIndex InvertedIndex::assemble(Params params, std::optional<std::size_t> min_len_filter,
                                      std::vector<Document> documents,
                                      std::unordered_map<std::string, std::vector<Posting>> postings) {
    check_params(params);
    if (documents.empty()) {
        throw DataError("index has no documents");
    }
    if (documents.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("too many documents for one index");
    }
    InvertedIndex index;
    index.params_ = params;
    index.min_len_filter_ = min_len_filter;
    std::uint64_t total_length = 0;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        if (d > 0 && !(documents[d - 1].id < documents[d].id)) {
            throw DataError("document ids must be unique and ascending (at '" + documents[d].id + "')");
        }
        if (min_len_filter && documents[d].length < *min_len_filter) {
            throw DataError("document '" + documents[d].id + "' is shorter than the minimum length filter");
        }
        total_length += documents[d].length;
        index.by_id_.emplace(documents[d].id, static_cast<std::uint32_t>(d));
    }

    std::vector<std::uint64_t> tf_sums(documents.size(), 0);
    for (const auto& [term, list] : postings) {
        if (term.empty() || list.empty()) {
            throw DataError("empty term or posting list in index");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].doc >= documents.size() || list[i].tf == 0) {
                throw DataError("invalid posting for term '" + term + "'");
            }
            if (i > 0 && list[i - 1].doc >= list[i].doc) {
                throw DataError("postings for term '" + term + "' are not sorted by document");
            }
            tf_sums[list[i].doc] += list[i].tf;
        }
    }
    for (std::size_t d = 0; d < documents.size(); ++d) {
        if (tf_sums[d] != documents[d].length) {
            throw DataError("document '" + documents[d].id + "' length does not match its postings");
        }
    }
    index.avg_doc_len_ = static_cast<double>(total_length) / static_cast<double>(documents.size());
    index.documents_ = std::move(documents);
    index.postings_ = std::move(postings);
    return index;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    const auto it = postings_.find(std::string(term));
    if (it == postings_.end()) {
        return {};
    }
    return it->second;
}

std::optional<std::uint32_t> InvertedIndex::doc_index(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> InvertedIndex::vocabulary() const {
    std::vector<std::string> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, list] : postings_) {
        terms.push_back(term);
    }
    std::sort(terms.begin(), terms.end());
    return terms;
}

double InvertedIndex::idf(std::string_view term) const {
    const double n = static_cast<double>(n_docs());
    const double df = static_cast<double>(document_frequency(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
    return params_ == other.params_ && min_len_filter_ == other.min_len_filter_ &&
           documents_ == other.documents_ && postings_ == other.postings_;
}

InvertedIndex build_index(std::span<const Passage> passages, Params params,
                          std::optional<std::size_t> min_len_filter) {
    std::vector<std::pair<std::string, std::string>> docs;
    docs.reserve(passages.size());
    for (const auto& p : passages) {
        docs.emplace_back(p.id, p.text);
    }
    return InvertedIndex::build(std::move(docs), params, min_len_filter);
}

// ---------------------------------------------------------------------------
// Scoring and search

double bm25_score(const InvertedIndex& index, std::span<const std::string> query_tokens,
                  std::string_view passage_id) {
    const auto doc = index.doc_index(passage_id);
    if (!doc) {
        throw DataError("passage '" + std::string(passage_id) + "' is not in the index");
    }
    const auto terms = unique_sorted(query_tokens);
    return score_doc(index, terms, *doc);
}

std::vector<RetrievalResult> search_tokens(const InvertedIndex& index, std::span<const std::string> query_tokens,
                                           std::size_t k) {
    const std::size_t n = index.n_docs();
    std::vector<double> scores(n, 0.0);
    // Terms are visited in sorted order so accumulation matches score_doc.
    for (const auto& term : unique_sorted(query_tokens)) {
        const auto list = index.postings(term);
        if (list.empty()) {
            continue;
        }
        const double idf = index.idf(term);
        for (const auto& p : list) {
            scores[p.doc] += term_weight(index, idf, p.tf, index.documents()[p.doc].length);
        }
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const std::size_t top = std::min(k, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    std::vector<RetrievalResult> results;
    results.reserve(top);
    for (std::size_t i = 0; i < top; ++i) {
        results.push_back({index.documents()[order[i]].id, scores[order[i]]});
    }
    return results;
}

std::vector<RetrievalResult> search(const InvertedIndex& index, std::string_view query, std::size_t k) {
    const auto tokens = tokenize(query);
    return search_tokens(index, tokens, k);
}

// ---------------------------------------------------------------------------
// Pooling

InvertedIndex pool_indexes(std::span<const InvertedIndex> indexes) {
    if (indexes.empty()) {
        throw DataError("nothing to pool");
    }
    const Params params = indexes.front().params();
    const auto min_len = indexes.front().min_len_filter();
    struct Source {
        std::string_view id;
        std::size_t index;
        std::uint32_t doc;
    };
    std::vector<Source> sources;
    for (std::size_t i = 0; i < indexes.size(); ++i) {
        if (!(indexes[i].params() == params) || indexes[i].min_len_filter() != min_len) {
            throw DataError("cannot pool indexes built with different parameters");
        }
        const auto& docs = indexes[i].documents();
        for (std::uint32_t d = 0; d < docs.size(); ++d) {
            sources.push_back({docs[d].id, i, d});
        }
    }
    std::sort(sources.begin(), sources.end(), [](const Source& a, const Source& b) { return a.id < b.id; });

    std::vector<std::vector<std::uint32_t>> remap(indexes.size());
    for (std::size_t i = 0; i < indexes.size(); ++i) {
        remap[i].resize(indexes[i].n_docs());
    }
    std::vector<Document> documents;
    documents.reserve(sources.size());
    for (std::size_t d = 0; d < sources.size(); ++d) {
        if (d > 0 && sources[d].id == sources[d - 1].id) {
            throw DataError("passage id collision while pooling: '" + std::string(sources[d].id) + "'");
        }
        const auto& s = sources[d];
        remap[s.index][s.doc] = static_cast<std::uint32_t>(d);
        documents.push_back(indexes[s.index].documents()[s.doc]);
    }

    std::unordered_map<std::string, std::vector<Posting>> postings;
    for (std::size_t i = 0; i < indexes.size(); ++i) {
        for (const auto& term : indexes[i].vocabulary()) {
            auto& merged = postings[term];
            for (const auto& p : indexes[i].postings(term)) {
                merged.push_back({remap[i][p.doc], p.tf});
            }
        }
    }
    for (auto& [term, list] : postings) {
        std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    }
    return InvertedIndex::assemble(params, min_len, std::move(documents), std::move(postings));
}

std::string pooled_id(const Passage& p) { return p.corpus_id + "/" + p.id; }

InvertedIndex pool_corpora(std::span<const Corpus> corpora, Params params, std::optional<std::size_t> min_len_filter) {
    std::vector<std::pair<std::string, std::string>> docs;
    std::set<std::string> seen;
    for (const auto& corpus : corpora) {
        for (const auto& p : corpus.passages()) {
            auto id = pooled_id(p);
            if (!seen.insert(id).second) {
                throw DataError("passage id collision after prefixing: '" + id + "'");
            }
            docs.emplace_back(std::move(id), p.text);
        }
    }
    return InvertedIndex::build(std::move(docs), params, min_len_filter);
}

Corpus pooled_corpus(std::span<const Corpus> corpora) {
    std::vector<Passage> passages;
    for (const auto& corpus : corpora) {
        for (const auto& p : corpus.passages()) {
            Passage copy = p;
            copy.id = pooled_id(p);
            passages.push_back(std::move(copy));
        }
    }
    return Corpus(std::move(passages));
}

// ---------------------------------------------------------------------------
// Sentence index

namespace {

std::vector<std::string> unit_doc_ids(const std::vector<SentenceUnit>& units) {
    std::vector<std::string> ids;
    ids.reserve(units.size());
    std::unordered_map<std::string_view, std::size_t> counter;
    for (const auto& u : units) {
        ids.push_back(u.passage_id + "#" + std::to_string(counter[u.passage_id]++));
    }
    return ids;
}

} // namespace

SentenceIndex::SentenceIndex(InvertedIndex index, std::vector<SentenceUnit> units)
    : index_(std::move(index)), units_(std::move(units)) {
    if (units_.size() != index_.n_docs()) {
        throw DataError("sentence index has " + std::to_string(index_.n_docs()) + " documents but " +
                        std::to_string(units_.size()) + " sentence units");
    }
    doc_to_unit_.assign(units_.size(), 0);
    const auto ids = unit_doc_ids(units_);
    for (std::size_t u = 0; u < ids.size(); ++u) {
        const auto doc = index_.doc_index(ids[u]);
        if (!doc) {
            throw DataError("sentence unit '" + ids[u] + "' has no document in the index");
        }
        doc_to_unit_[*doc] = u;
    }
}

SentenceIndex build_sentence_index(std::span<const Passage> passages, Params params) {
    std::vector<SentenceUnit> units;
    for (const auto& p : passages) {
        for (const auto& span : p.sentences) {
            units.push_back({p.id, span, span_text(p.text, span)});
        }
    }
    const auto ids = unit_doc_ids(units);
    std::vector<std::pair<std::string, std::string>> docs;
    docs.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        docs.emplace_back(ids[i], units[i].text);
    }
    auto index = InvertedIndex::build(std::move(docs), params, std::nullopt);
    return SentenceIndex(std::move(index), std::move(units));
}

std::optional<SentenceMatch> best_sentence_containing(const SentenceIndex& sentences,
                                                      std::span<const std::string> query_tokens,
                                                      std::span<const std::string> answers) {
    const InvertedIndex& index = sentences.index();
    // A sentence containing an answer contains all of its tokens, so the
    // rarest token's postings bound the candidate set.
    std::set<std::uint32_t> candidates;
    bool scan_all = false;
    for (const auto& answer : answers) {
        const auto tokens = tokenize(answer);
        if (tokens.empty()) {
            scan_all = true;
            break;
        }
        std::span<const Posting> rarest = index.postings(tokens.front());
        for (const auto& t : tokens) {
            const auto list = index.postings(t);
            if (list.size() < rarest.size()) {
                rarest = list;
            }
        }
        for (const auto& p : rarest) {
            candidates.insert(p.doc);
        }
    }
    if (scan_all) {
        candidates.clear();
        for (std::uint32_t d = 0; d < index.n_docs(); ++d) {
            candidates.insert(d);
        }
    }

    const auto terms = unique_sorted(query_tokens);
    std::optional<SentenceMatch> best;
    for (const std::uint32_t doc : candidates) {
        const SentenceUnit& unit = sentences.unit_for_doc(doc);
        const bool contains = std::any_of(answers.begin(), answers.end(), [&](const std::string& a) {
            return text::contains_word_sequence(unit.text, a);
        });
        if (!contains) {
            continue;
        }
        const double score = score_doc(index, terms, doc);
        // Candidates are visited in ascending doc order, so strict > keeps
        // the smallest id on ties.
        if (!best || score > best->score) {
            best = SentenceMatch{unit.passage_id, unit.span, unit.text, score};
        }
    }
    return best;
}

std::optional<SentenceMatch> align_sentence(const QAPair& qa, const SentenceIndex& index) {
    auto query = tokenize(qa.question);
    for (const auto& a : qa.answers) {
        const auto more = tokenize(a);
        query.insert(query.end(), more.begin(), more.end());
    }
    return best_sentence_containing(index, query, qa.answers);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::string serialize(const InvertedIndex& index, const std::vector<SentenceUnit>* units) {
    std::string out;
    OrderedJson header;
    header["format"] = "shiftlab-bm25";
    header["version"] = kIndexFormatVersion;
    header["granularity"] = units ? "sentence" : "passage";
    header["k1"] = index.params().k1;
    header["b"] = index.params().b;
    header["min_len_filter"] = index.min_len_filter() ? OrderedJson(*index.min_len_filter()) : OrderedJson(nullptr);
    header["n_docs"] = index.n_docs();
    header["avg_doc_len"] = index.avg_doc_len();
    const auto vocabulary = index.vocabulary();
    header["n_terms"] = vocabulary.size();
    out += detail::dump(header) + '\n';

    for (std::uint32_t d = 0; d < index.n_docs(); ++d) {
        OrderedJson line;
        line["doc"] = index.documents()[d].id;
        line["len"] = index.documents()[d].length;
        if (units) {
            // Units are stored in document order; the SentenceIndex mapping
            // is rebuilt on load.
            const auto& unit = (*units)[d];
            line["passage_id"] = unit.passage_id;
            line["span"] = {unit.span.begin, unit.span.end};
            line["text"] = unit.text;
        }
        out += detail::dump(line) + '\n';
    }
    for (const auto& term : vocabulary) {
        OrderedJson line;
        line["term"] = term;
        auto list = OrderedJson::array();
        for (const auto& p : index.postings(term)) {
            list.push_back({p.doc, p.tf});
        }
        line["postings"] = std::move(list);
        out += detail::dump(line) + '\n';
    }
    return out;
}

} // namespace

std::string serialize_index(const InvertedIndex& index) { return serialize(index, nullptr); }

std::string serialize_index(const SentenceIndex& index) {
    std::vector<SentenceUnit> by_doc;
    by_doc.reserve(index.units().size());
    for (std::uint32_t d = 0; d < index.index().n_docs(); ++d) {
        by_doc.push_back(index.unit_for_doc(d));
    }
    return serialize(index.index(), &by_doc);
}

LoadedIndex parse_index(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < content.size()) {
        const std::size_t end = content.find('\n', pos);
        const std::size_t stop = end == std::string_view::npos ? content.size() : end;
        if (stop > pos) {
            lines.push_back(content.substr(pos, stop - pos));
        }
        pos = stop + 1;
    }
    if (lines.empty()) {
        throw DataError("index file is empty");
    }
    const auto with_line = [](std::size_t n, auto&& fn) {
        try {
            return fn();
        } catch (const DataError& e) {
            throw DataError(located("", n, e.what()));
        }
    };

    const Json header = with_line(1, [&] { return detail::parse_object(lines[0]); });
    if (!header.contains("format") || header["format"] != "shiftlab-bm25") {
        throw DataError("not a shiftlab BM25 index (bad header)");
    }
    if (!header.contains("version") || header["version"] != kIndexFormatVersion) {
        throw DataError("unsupported index format version");
    }
    Params params;
    std::optional<std::size_t> min_len;
    std::size_t n_docs = 0;
    std::size_t n_terms = 0;
    bool sentence_level = false;
    with_line(1, [&] {
        params.k1 = detail::get_number(header, "k1");
        params.b = detail::get_number(header, "b");
        if (!header["min_len_filter"].is_null()) {
            min_len = detail::get_index(header, "min_len_filter");
        }
        n_docs = detail::get_index(header, "n_docs");
        n_terms = detail::get_index(header, "n_terms");
        const auto granularity = detail::get_string(header, "granularity");
        if (granularity != "passage" && granularity != "sentence") {
            throw DataError("unknown granularity '" + granularity + "'");
        }
        sentence_level = granularity == "sentence";
        return 0;
    });
    if (lines.size() != 1 + n_docs + n_terms) {
        throw DataError("index file has " + std::to_string(lines.size()) + " lines, header promises " +
                        std::to_string(1 + n_docs + n_terms));
    }

    std::vector<Document> documents;
    std::vector<SentenceUnit> units;
    documents.reserve(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        with_line(d + 2, [&] {
            const Json j = detail::parse_object(lines[d + 1]);
            const std::size_t len = detail::get_index(j, "len");
            documents.push_back({detail::get_string(j, "doc"), static_cast<std::uint32_t>(len)});
            if (sentence_level) {
                const Json& span = detail::require(j, "span");
                if (!span.is_array() || span.size() != 2 || !span[0].is_number_unsigned() ||
                    !span[1].is_number_unsigned()) {
                    throw DataError("field 'span' must be a pair of non-negative integers");
                }
                units.push_back({detail::get_string(j, "passage_id"),
                                 {span[0].get<std::size_t>(), span[1].get<std::size_t>()},
                                 detail::get_string(j, "text")});
            }
            return 0;
        });
    }
    std::unordered_map<std::string, std::vector<Posting>> postings;
    for (std::size_t t = 0; t < n_terms; ++t) {
        const std::size_t number = n_docs + t + 2;
        with_line(number, [&] {
            const Json j = detail::parse_object(lines[n_docs + t + 1]);
            const auto term = detail::get_string(j, "term");
            const Json& list = detail::require(j, "postings");
            if (!list.is_array()) {
                throw DataError("field 'postings' must be an array");
            }
            std::vector<Posting> parsed;
            parsed.reserve(list.size());
            for (const auto& entry : list) {
                if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_unsigned() ||
                    !entry[1].is_number_unsigned()) {
                    throw DataError("posting must be [doc, tf]");
                }
                parsed.push_back({entry[0].get<std::uint32_t>(), entry[1].get<std::uint32_t>()});
            }
            if (!postings.emplace(term, std::move(parsed)).second) {
                throw DataError("duplicate term '" + term + "'");
            }
            return 0;
        });
    }
    LoadedIndex loaded{InvertedIndex::assemble(params, min_len, std::move(documents), std::move(postings)),
                       std::nullopt};
    if (sentence_level) {
        loaded.units = std::move(units);
    }
    return loaded;
}

LoadedIndex load_index(const std::filesystem::path& path) {
    try {
        return parse_index(io::read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

SentenceIndex load_sentence_index(const std::filesystem::path& path) {
    auto loaded = load_index(path);
    if (!loaded.units) {
        throw DataError(path.string() + ": expected a sentence-level index (build with --sentences)");
    }
    return SentenceIndex(std::move(loaded.index), std::move(*loaded.units));
}

} // namespace shiftlab::bm25
