#include "shiftlab/shift_diagnostics.hpp"

#include "shiftlab/error.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace shiftlab::diagnostics {

std::string_view to_string(NormalizationMode mode) {
    return mode == NormalizationMode::Ratio ? "ratio" : "exponentiated";
}

NormalizationMode normalization_mode_from_string(std::string_view s) {
    if (s == "ratio") {
        return NormalizationMode::Ratio;
    }
    if (s == "exponentiated") {
        return NormalizationMode::Exponentiated;
    }
    throw DataError("unknown normalization mode '" + std::string(s) + "' (expected ratio or exponentiated)");
}

std::string_view to_string(Stage stage) { return stage == Stage::Retriever ? "retriever" : "reader"; }

void ClassifierConfig::validate() const {
    if (!std::isfinite(tau_retriever)) {
        throw DataError("tau_retriever must be finite");
    }
    if (!std::isfinite(tau_reader) || !(tau_reader > 0.0)) {
        throw DataError("tau_reader must be a positive finite number");
    }
}

NormalizedDistribution normalize_retriever(const ScoreMatrix& sm, NormalizationMode mode) {
    validate(sm);
    NormalizedDistribution out;
    out.gold_index = sm.gold_index;
    out.masses.resize(sm.energies.size());
    if (mode == NormalizationMode::Ratio) {
        for (std::size_t i = 0; i < sm.energies.size(); ++i) {
            if (!(sm.energies[i] > 0.0)) {
                throw DataError("question '" + sm.question_id + "': ratio normalization needs positive energies (" +
                                "energies[" + std::to_string(i) + "] = " + std::to_string(sm.energies[i]) +
                                "); use exponentiated mode");
            }
        }
        const double total = pairwise_sum(sm.energies);
        for (std::size_t i = 0; i < sm.energies.size(); ++i) {
            out.masses[i] = sm.energies[i] / total;
        }
        return out;
    }
    const double top = *std::max_element(sm.energies.begin(), sm.energies.end());
    for (std::size_t i = 0; i < sm.energies.size(); ++i) {
        out.masses[i] = std::exp(sm.energies[i] - top);
    }
    const double total = pairwise_sum(out.masses);
    for (double& m : out.masses) {
        m /= total;
    }
    return out;
}

NormalizedDistribution normalize_reader(const AnswerLikelihoodRecord& rec) {
    validate(rec);
    NormalizedDistribution out;
    out.gold_index = rec.gold_index;
    std::vector<double> log_mass;
    log_mass.reserve(rec.candidates.size());
    for (const auto& tokens : rec.token_logprobs) {
        log_mass.push_back(pairwise_sum(tokens));
    }
    const double top = *std::max_element(log_mass.begin(), log_mass.end());
    out.masses.resize(log_mass.size());
    for (std::size_t i = 0; i < log_mass.size(); ++i) {
        out.masses[i] = std::exp(log_mass[i] - top);
    }
    const double total = pairwise_sum(out.masses);
    for (double& m : out.masses) {
        m /= total;
    }
    return out;
}

namespace {

template <class Record, class Normalize>
StageDistances stage_distances(std::span<const Record> records, Stage stage, std::size_t workers, Normalize normalize) {
    if (records.empty()) {
        throw DataError(std::string("no ") + std::string(to_string(stage)) + " records to diagnose");
    }
    StageDistances out;
    out.per_question.resize(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const NormalizedDistribution dist = normalize(records[i]);
        out.per_question[i] = QuestionDistance{records[i].question_id, stage, dist.masses.size(),
                                               distance_to_uniform(dist.masses),
                                               distance_to_one_hot(dist.masses, dist.gold_index)};
    });
    std::vector<double> du;
    std::vector<double> dg;
    du.reserve(records.size());
    dg.reserve(records.size());
    for (const auto& q : out.per_question) {
        du.push_back(q.d_uniform);
        dg.push_back(q.d_gold);
    }
    out.d_uniform = mean(du);
    out.d_gold = mean(dg);
    return out;
}

void check_reference(double d_u_r) {
    if (!std::isfinite(d_u_r) || d_u_r < 0.0) {
        throw DataError("reference distance d_u_r must be finite and >= 0");
    }
}

} // namespace

StageDistances retriever_stats(std::span<const ScoreMatrix> matrices, NormalizationMode mode, std::size_t workers) {
    return stage_distances(matrices, Stage::Retriever, workers,
                           [mode](const ScoreMatrix& sm) { return normalize_retriever(sm, mode); });
}

StageDistances reader_distances(std::span<const AnswerLikelihoodRecord> records, std::size_t workers) {
    return stage_distances(records, Stage::Reader, workers,
                           [](const AnswerLikelihoodRecord& r) { return normalize_reader(r); });
}

double reader_stats(std::span<const AnswerLikelihoodRecord> records, double reference_d_u_r) {
    check_reference(reference_d_u_r);
    return reference_d_u_r - reader_distances(records).d_uniform;
}

Reference Reference::from_value(double d_u_r) {
    check_reference(d_u_r);
    return Reference{d_u_r, "value"};
}

Reference Reference::from_records(std::span<const AnswerLikelihoodRecord> source_records, std::string source) {
    return Reference{reader_distances(source_records).d_uniform, std::move(source)};
}

ShiftLabel classify_shift(const ShiftStatistics& stats, const ClassifierConfig& config) {
    config.validate();
    const bool input_compatible = stats.retriever_stat > config.tau_retriever;
    const bool output_compatible = std::abs(stats.reader_stat) <= config.tau_reader;
    if (input_compatible) {
        return output_compatible ? ShiftLabel::NoShift : ShiftLabel::LabelShift;
    }
    return output_compatible ? ShiftLabel::CovariateShift : ShiftLabel::FullShift;
}

std::string_view recommendation(ShiftLabel label) {
    switch (label) {
    case ShiftLabel::NoShift:
        return "source model already fits the target; expect minimal gains from data interventions";
    case ShiftLabel::LabelShift:
    case ShiftLabel::CovariateShift:
        return "zero-shot data augmentation (cloze or generated questions over the target corpus)";
    case ShiftLabel::FullShift:
        return "few-shot generation from target examples or target-domain annotation";
    }
    return "";
}

DiagnosticReport diagnose(std::span<const ScoreMatrix> matrices, std::span<const AnswerLikelihoodRecord> records,
                          const Reference& reference, const ClassifierConfig& config, std::size_t workers) {
    config.validate();
    check_reference(reference.d_u_r);
    const StageDistances retriever = retriever_stats(matrices, config.mode, workers);
    const StageDistances reader = reader_distances(records, workers);

    DiagnosticReport report;
    auto& s = report.statistics;
    s.d_u_t = retriever.d_uniform;
    s.d_g_t = retriever.d_gold;
    s.retriever_stat = s.d_u_t - s.d_g_t;
    s.d_u_r = reference.d_u_r;
    s.reader_d_u_t = reader.d_uniform;
    s.reader_stat = s.d_u_r - s.reader_d_u_t;
    s.n_examples = matrices.size();
    s.n_reader_examples = records.size();
    validate(s);

    report.label = classify_shift(s, config);
    report.recommendation = std::string(recommendation(report.label));
    report.config = config;
    report.reference_source = reference.source;
    report.per_question = retriever.per_question;
    report.per_question.insert(report.per_question.end(), reader.per_question.begin(), reader.per_question.end());
    return report;
}

DiagnosticReport diagnose(const std::filesystem::path& score_path, const std::filesystem::path& likelihood_path,
                          const Reference& reference, const ClassifierConfig& config, std::size_t workers) {
    const auto matrices = load_score_matrices(score_path);
    if (matrices.empty()) {
        throw DataError(score_path.string() + ": no score matrices");
    }
    const auto records = load_answer_likelihoods(likelihood_path);
    if (records.empty()) {
        throw DataError(likelihood_path.string() + ": no answer likelihood records");
    }
    return diagnose(matrices, records, reference, config, workers);
}

} // namespace shiftlab::diagnostics
