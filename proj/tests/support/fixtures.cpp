#include "fixtures.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace shiftlab::testkit {

namespace fs = std::filesystem;

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("shiftlab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

fs::path TempDir::write(const std::string& name, const std::string& content) const {
    const fs::path p = path_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
    return p;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string skewed_word(Rng& rng, std::size_t vocab) {
    const std::size_t a = rng.below(vocab);
    const std::size_t b = rng.below(vocab);
    return "w" + std::to_string(std::min(a, b));
}

} // namespace

SyntheticCorpus random_corpus(std::uint64_t seed, std::size_t n_docs, std::size_t vocab, std::size_t min_len,
                              std::size_t max_len, const std::string& corpus_id) {
    Rng rng(seed);
    SyntheticCorpus out;
    for (std::size_t i = 0; i < n_docs; ++i) {
        const std::size_t len = min_len + rng.below(max_len - min_len + 1);
        OracleDoc doc;
        doc.id = "d" + std::to_string(i);
        std::string text;
        for (std::size_t t = 0; t < len; ++t) {
            doc.tokens.push_back(skewed_word(rng, vocab));
            if (!text.empty()) {
                text += ' ';
            }
            text += doc.tokens.back();
        }
        Passage p;
        p.id = doc.id;
        p.corpus_id = corpus_id;
        p.text = text;
        p.sentences = split_sentences(text);
        out.passages.push_back(std::move(p));
        out.docs.push_back(std::move(doc));
    }
    return out;
}

std::vector<std::string> random_query(Rng& rng, std::size_t vocab, std::size_t len) {
    std::vector<std::string> q;
    for (std::size_t i = 0; i < len; ++i) {
        q.push_back(skewed_word(rng, vocab));
    }
    return q;
}

std::vector<double> random_simplex(Rng& rng, std::size_t k) {
    std::vector<double> p(k);
    double total = 0.0;
    for (auto& x : p) {
        x = rng.below(10) == 0 ? 0.0 : -std::log(1.0 - rng.unit());
        total += x;
    }
    if (total == 0.0) {
        p[rng.below(k)] = 1.0;
        return p;
    }
    for (auto& x : p) {
        x /= total;
    }
    return p;
}

AccInstance random_acc_instance(Rng& rng, std::size_t n_questions, std::size_t n_passages, std::size_t depth) {
    const std::vector<std::string> pool{"oval office", "tetanus", "lockjaw", "wall street", "dow", "paris"};
    const std::vector<std::string> filler{"removal", "river", "the", "a", "stone", "office", "street"};
    std::vector<Passage> ps;
    for (std::size_t i = 0; i < n_passages; ++i) {
        std::string text;
        const std::size_t len = 3 + rng.below(8);
        for (std::size_t t = 0; t < len; ++t) {
            text += (t ? " " : "");
            text += rng.below(4) == 0 ? pool[rng.below(pool.size())] : filler[rng.below(filler.size())];
        }
        ps.push_back({"p" + std::to_string(i), "c", text + ".", {}});
    }
    AccInstance inst{Corpus(ps), {}, {}};
    for (std::size_t q = 0; q < n_questions; ++q) {
        std::vector<std::string> answers{pool[rng.below(pool.size())]};
        if (rng.below(3) == 0) {
            answers.push_back(pool[rng.below(pool.size())]);
        }
        inst.questions.push_back({"q" + std::to_string(q), "question?", answers, {}, QuestionStyle::Natural});
        eval::RankedList list{"q" + std::to_string(q), {}};
        for (std::size_t r = 0; r < depth; ++r) {
            list.passage_ids.push_back("p" + std::to_string(rng.below(n_passages)));
        }
        inst.retrievals.push_back(std::move(list));
    }
    return inst;
}

namespace {

constexpr std::size_t kRetrieverK = 20;
constexpr std::size_t kReaderK = 5;

ScoreMatrix retriever_record(Rng& rng, std::size_t i, bool sharp) {
    ScoreMatrix sm;
    sm.question_id = "q" + std::to_string(i);
    sm.gold_index = rng.below(kRetrieverK);
    for (std::size_t c = 0; c < kRetrieverK; ++c) {
        sm.candidate_ids.push_back("c" + std::to_string(i) + "-" + std::to_string(c));
        const double noise = rng.unit();
        if (sharp) {
            sm.energies.push_back(c == sm.gold_index ? 12.0 + noise : 2.0 * noise);
        } else {
            sm.energies.push_back(0.2 * noise);
        }
    }
    return sm;
}

AnswerLikelihoodRecord reader_record(Rng& rng, const std::string& id, bool sharp) {
    AnswerLikelihoodRecord rec;
    rec.question_id = id;
    rec.gold_index = rng.below(kReaderK);
    for (std::size_t c = 0; c < kReaderK; ++c) {
        rec.candidates.push_back("answer " + std::to_string(c));
        std::vector<double> lp;
        for (int t = 0; t < 2; ++t) {
            const double noise = rng.unit();
            if (sharp) {
                lp.push_back(c == rec.gold_index ? -0.05 - 0.05 * noise : -2.5 - noise);
            } else {
                lp.push_back(-1.0 - 0.1 * noise);
            }
        }
        rec.token_logprobs.push_back(std::move(lp));
    }
    return rec;
}

} // namespace

QuadrantCase make_quadrant(bool sharp_retriever, bool matched_reader, std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    QuadrantCase qc;
    for (std::size_t i = 0; i < n; ++i) {
        qc.scores.push_back(retriever_record(rng, i, sharp_retriever));
    }
    // The reference reader is sharp; a matched target is sharp too.
    for (std::size_t i = 0; i < n; ++i) {
        qc.reference.push_back(reader_record(rng, "src" + std::to_string(i), true));
    }
    for (std::size_t i = 0; i < n; ++i) {
        qc.likelihoods.push_back(reader_record(rng, "q" + std::to_string(i), matched_reader));
    }
    if (sharp_retriever) {
        qc.expected = matched_reader ? ShiftLabel::NoShift : ShiftLabel::LabelShift;
    } else {
        qc.expected = matched_reader ? ShiftLabel::CovariateShift : ShiftLabel::FullShift;
    }
    return qc;
}

namespace {

constexpr std::array kFillers = {"river",  "stone",   "quietly", "market", "council", "bright",  "harbor",
                                 "signal", "winter",  "garden",  "engine", "paper",   "silver",  "northern",
                                 "ancient", "record", "valley",  "station", "copper", "season"};
constexpr std::array kOpeners = {"The", "Every", "Some", "Local", "Many", "Later"};
constexpr std::array kTypes = {"PERSON", "ORG", "LOC", "MISC"};

std::string entity_token(std::size_t n) {
    std::string t = "Xq";
    t += static_cast<char>('a' + (n / 26) % 26);
    t += static_cast<char>('a' + n % 26);
    if (n >= 26 * 26) {
        t += std::to_string(n / (26 * 26));
    }
    return t;
}

} // namespace

ClozeWorld make_cloze_world(std::uint64_t seed, std::size_t n_entities, std::size_t n_passages) {
    Rng rng(seed);
    ClozeWorld world;
    std::size_t next_token = 0;
    for (std::size_t e = 0; e < n_entities; ++e) {
        std::string surface = entity_token(next_token++);
        if (rng.below(3) == 0) {
            surface += " " + entity_token(next_token++);
        }
        world.mentions.push_back({surface, kTypes[rng.below(kTypes.size())], 1 + rng.below(100)});
    }

    auto filler = [&] { return std::string(kFillers[rng.below(kFillers.size())]); };
    std::vector<std::vector<std::string>> passage_sentences(n_passages);
    auto sentence_with = [&](const std::string& surface) {
        std::string s = kOpeners[rng.below(kOpeners.size())];
        s += " " + filler() + " " + filler() + " " + surface + " " + filler() + " " + filler();
        if (rng.below(2) == 0) {
            s += " " + world.mentions[rng.below(world.mentions.size())].surface;
        }
        s += " " + filler() + ".";
        return s;
    };
    // Each entity once, round robin, then a few extra random sentences.
    for (std::size_t e = 0; e < n_entities; ++e) {
        passage_sentences[e % n_passages].push_back(sentence_with(world.mentions[e].surface));
    }
    for (auto& sentences : passage_sentences) {
        const std::size_t extra = 1 + rng.below(3);
        for (std::size_t i = 0; i < extra; ++i) {
            sentences.push_back(sentence_with(world.mentions[rng.below(n_entities)].surface));
        }
    }
    for (std::size_t i = 0; i < n_passages; ++i) {
        Passage p;
        p.id = "p" + std::to_string(i);
        p.corpus_id = "cloze";
        for (const auto& s : passage_sentences[i]) {
            if (!p.text.empty()) {
                p.text += ' ';
            }
            p.text += s;
        }
        p.sentences = split_sentences(p.text);
        world.passages.push_back(std::move(p));
    }
    return world;
}

} // namespace shiftlab::testkit
