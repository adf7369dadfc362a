#pragma once

// Generalizability test for ODQA domain shift.
//
// The retriever stage normalizes energy scores over a sampled context set and
// measures how far each question's distribution sits from uniform (d_u) and
// from the one-hot gold distribution (d_g). The reader stage does the same
// for answer likelihoods and compares the target's distance from uniform with
// that of a source-domain reference. The two compatibility decisions select
// one of four shift labels.

#include "shiftlab/datamodel.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace shiftlab::diagnostics {

enum class NormalizationMode {
    Ratio,         ///< p_i = e_i / sum(e); requires positive energies
    Exponentiated, ///< softmax over energies
};

std::string_view to_string(NormalizationMode mode);
NormalizationMode normalization_mode_from_string(std::string_view s);

struct NormalizedDistribution {
    std::vector<double> masses;
    std::size_t gold_index = 0;
};

struct ClassifierConfig {
    double tau_retriever = 0.0; ///< input compatible iff d_u - d_g > tau_retriever
    double tau_reader = 0.1;    ///< output compatible iff |d_u_r - d_u_t| <= tau_reader
    NormalizationMode mode = NormalizationMode::Exponentiated;

    /// Throws DataError unless tau_reader > 0 and both thresholds are finite.
    void validate() const;

    bool operator==(const ClassifierConfig&) const = default;
};

NormalizedDistribution normalize_retriever(const ScoreMatrix& sm, NormalizationMode mode);

/// Sums token log-probabilities per candidate and normalizes over the
/// candidate set with log-sum-exp.
NormalizedDistribution normalize_reader(const AnswerLikelihoodRecord& rec);

// Distances -----------------------------------------------------------------
//
// Candidates have no geometry, so the ground metric is 0/1 and Wasserstein-1
// reduces to total variation.

/// Total variation 1/2 * sum |p_i - q_i|. Throws DataError on length mismatch.
double distance(std::span<const double> p, std::span<const double> q);

/// Total variation to the uniform distribution of the same length, computed
/// against the exact masses 1/K rather than rounded ones.
double distance_to_uniform(std::span<const double> p);

/// Total variation to the one-hot distribution at `index`: 1 - p[index].
double distance_to_one_hot(std::span<const double> p, std::size_t index);

/// Wasserstein-1 between p and q under a K x K row-major ground cost,
/// solved as a transportation problem. Throws DataError on shape mismatch
/// or a negative/non-finite cost.
double wasserstein1(std::span<const double> p, std::span<const double> q, std::span<const double> cost);

/// The 0/1 ground cost under which wasserstein1 equals total variation.
std::vector<double> discrete_cost(std::size_t k);

// Statistics ----------------------------------------------------------------

enum class Stage { Retriever, Reader };

std::string_view to_string(Stage stage);

struct QuestionDistance {
    std::string question_id;
    Stage stage = Stage::Retriever;
    std::size_t k = 0;
    double d_uniform = 0.0;
    double d_gold = 0.0;

    bool operator==(const QuestionDistance&) const = default;
};

struct StageDistances {
    double d_uniform = 0.0; ///< mean over questions
    double d_gold = 0.0;
    std::vector<QuestionDistance> per_question;
};

/// Mean distances of normalized retriever distributions from uniform and from
/// gold. Each question is compared with the uniform of its own K. Throws
/// DataError on an empty collection.
StageDistances retriever_stats(std::span<const ScoreMatrix> matrices, NormalizationMode mode,
                               std::size_t workers = 1);

StageDistances reader_distances(std::span<const AnswerLikelihoodRecord> records, std::size_t workers = 1);

/// reference_d_u_r minus the target reader's mean distance from uniform.
double reader_stats(std::span<const AnswerLikelihoodRecord> records, double reference_d_u_r);

/// Source-domain reference for the reader stage.
struct Reference {
    double d_u_r = 0.0;
    std::string source; ///< "value" or the path of the source likelihood file

    static Reference from_value(double d_u_r);
    static Reference from_records(std::span<const AnswerLikelihoodRecord> source_records, std::string source);
};

ShiftLabel classify_shift(const ShiftStatistics& stats, const ClassifierConfig& config);

/// Intervention family suggested for a label.
std::string_view recommendation(ShiftLabel label);

struct DiagnosticReport {
    ShiftStatistics statistics;
    ShiftLabel label = ShiftLabel::NoShift;
    std::string recommendation;
    ClassifierConfig config;
    std::string reference_source;
    std::vector<QuestionDistance> per_question; ///< retriever rows, then reader rows

    bool operator==(const DiagnosticReport&) const = default;
};

DiagnosticReport diagnose(std::span<const ScoreMatrix> matrices, std::span<const AnswerLikelihoodRecord> records,
                          const Reference& reference, const ClassifierConfig& config, std::size_t workers = 1);

/// File-level composition; loader errors propagate and no report is built
/// unless both inputs are non-empty.
DiagnosticReport diagnose(const std::filesystem::path& score_path, const std::filesystem::path& likelihood_path,
                          const Reference& reference, const ClassifierConfig& config, std::size_t workers = 1);

} // namespace shiftlab::diagnostics
