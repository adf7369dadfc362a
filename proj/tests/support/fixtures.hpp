#pragma once

#include "oracles.hpp"

#include "shiftlab/augmentation.hpp"
#include "shiftlab/datamodel.hpp"
#include "shiftlab/evaluation.hpp"
#include "shiftlab/random.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace shiftlab::testkit {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }
    std::filesystem::path write(const std::string& name, const std::string& content) const;

private:
    std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Random corpora and queries over a skewed vocabulary "w0", "w1", ...

struct SyntheticCorpus {
    std::vector<Passage> passages;
    std::vector<OracleDoc> docs; ///< same passages as token lists
};

SyntheticCorpus random_corpus(std::uint64_t seed, std::size_t n_docs, std::size_t vocab, std::size_t min_len,
                              std::size_t max_len, const std::string& corpus_id = "synthetic");

std::vector<std::string> random_query(Rng& rng, std::size_t vocab, std::size_t len);

/// Random point on the probability simplex, with some exact zeros.
std::vector<double> random_simplex(Rng& rng, std::size_t k);

// ---------------------------------------------------------------------------
// Acc@k instances: answers come from a small pool of phrases and passages mix
// pool phrases with filler, some of which embed pool words ("removal").

struct AccInstance {
    Corpus corpus;
    std::vector<QAPair> questions;
    std::vector<eval::RankedList> retrievals;
};

AccInstance random_acc_instance(Rng& rng, std::size_t n_questions, std::size_t n_passages, std::size_t depth);

// ---------------------------------------------------------------------------
// Diagnostic fixtures

struct QuadrantCase {
    std::vector<ScoreMatrix> scores;
    std::vector<AnswerLikelihoodRecord> likelihoods;
    std::vector<AnswerLikelihoodRecord> reference; ///< source-domain records
    ShiftLabel expected = ShiftLabel::NoShift;
};

/// A retriever that is sharp on gold or flat, and a reader whose sharpness
/// matches or differs from the reference records.
QuadrantCase make_quadrant(bool sharp_retriever, bool matched_reader, std::uint64_t seed, std::size_t n = 100);

// ---------------------------------------------------------------------------
// Cloze fixtures: every entity surface is made of "Xq??" tokens that occur
// nowhere else, and each entity appears in at least one sentence.

struct ClozeWorld {
    std::vector<Passage> passages;
    std::vector<EntityMention> mentions;
};

ClozeWorld make_cloze_world(std::uint64_t seed, std::size_t n_entities, std::size_t n_passages);

} // namespace shiftlab::testkit
