#include "shiftlab/report.hpp"

#include "json_codec.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/io.hpp"

#include <cmath>

namespace shiftlab {

using detail::Json;
using detail::OrderedJson;
using namespace diagnostics;

namespace {

void check_report(const DiagnosticReport& report) {
    validate(report.statistics);
    report.config.validate();
    if (report.per_question.empty()) {
        throw DataError("report has no per-question distances");
    }
    for (const auto& q : report.per_question) {
        if (!std::isfinite(q.d_uniform) || !std::isfinite(q.d_gold) || q.d_uniform < 0.0 || q.d_gold < 0.0) {
            throw DataError("question '" + q.question_id + "' has an invalid distance");
        }
    }
}

} // namespace

std::string report_to_json(const DiagnosticReport& report, std::string_view extra_config) {
    check_report(report);
    const auto& s = report.statistics;
    OrderedJson j;
    j["shift_label"] = std::string(to_string(report.label));
    j["retriever_stat"] = s.retriever_stat;
    j["reader_stat"] = s.reader_stat;
    j["recommendation"] = report.recommendation;
    j["statistics"] = {
        {"d_u_t", s.d_u_t},
        {"d_g_t", s.d_g_t},
        {"d_u_r", s.d_u_r},
        {"reader_d_u_t", s.reader_d_u_t},
        {"n_examples", s.n_examples},
        {"n_reader_examples", s.n_reader_examples},
    };
    OrderedJson config;
    config["tau_retriever"] = report.config.tau_retriever;
    config["tau_reader"] = report.config.tau_reader;
    config["mode"] = std::string(to_string(report.config.mode));
    config["reference_source"] = report.reference_source;
    OrderedJson extra;
    try {
        extra = OrderedJson::parse(extra_config);
    } catch (const OrderedJson::exception& e) {
        throw DataError(std::string("invalid config echo: ") + e.what());
    }
    if (!extra.is_object()) {
        throw DataError("config echo must be a JSON object");
    }
    for (auto it = extra.begin(); it != extra.end(); ++it) {
        if (!config.contains(it.key())) {
            config[it.key()] = it.value();
        }
    }
    j["config"] = std::move(config);
    auto rows = OrderedJson::array();
    for (const auto& q : report.per_question) {
        OrderedJson row;
        row["question_id"] = q.question_id;
        row["stage"] = std::string(to_string(q.stage));
        row["k"] = q.k;
        row["d_uniform"] = q.d_uniform;
        row["d_gold"] = q.d_gold;
        rows.push_back(std::move(row));
    }
    j["per_question"] = std::move(rows);
    return j.dump(2) + "\n";
}

DiagnosticReport report_from_json(std::string_view text) {
    const Json j = detail::parse_object(text);
    DiagnosticReport report;
    report.label = shift_label_from_string(detail::get_string(j, "shift_label"));
    report.recommendation = detail::get_string(j, "recommendation");
    auto& s = report.statistics;
    s.retriever_stat = detail::get_number(j, "retriever_stat");
    s.reader_stat = detail::get_number(j, "reader_stat");
    const Json& stats = detail::require(j, "statistics");
    s.d_u_t = detail::get_number(stats, "d_u_t");
    s.d_g_t = detail::get_number(stats, "d_g_t");
    s.d_u_r = detail::get_number(stats, "d_u_r");
    s.reader_d_u_t = detail::get_number(stats, "reader_d_u_t");
    s.n_examples = detail::get_index(stats, "n_examples");
    s.n_reader_examples = detail::get_index(stats, "n_reader_examples");
    const Json& config = detail::require(j, "config");
    report.config.tau_retriever = detail::get_number(config, "tau_retriever");
    report.config.tau_reader = detail::get_number(config, "tau_reader");
    report.config.mode = normalization_mode_from_string(detail::get_string(config, "mode"));
    report.reference_source = detail::get_string(config, "reference_source");
    const Json& rows = detail::require(j, "per_question");
    if (!rows.is_array()) {
        throw DataError("field 'per_question' must be an array");
    }
    for (const auto& row : rows) {
        QuestionDistance q;
        q.question_id = detail::get_string(row, "question_id");
        const auto stage = detail::get_string(row, "stage");
        if (stage == "retriever") {
            q.stage = Stage::Retriever;
        } else if (stage == "reader") {
            q.stage = Stage::Reader;
        } else {
            throw DataError("unknown stage '" + stage + "'");
        }
        q.k = detail::get_index(row, "k");
        q.d_uniform = detail::get_number(row, "d_uniform");
        q.d_gold = detail::get_number(row, "d_gold");
        report.per_question.push_back(std::move(q));
    }
    check_report(report);
    return report;
}

void save_report(const DiagnosticReport& report, const std::filesystem::path& path, std::string_view extra_config) {
    io::write_file_atomic(path, report_to_json(report, extra_config));
}

DiagnosticReport load_report(const std::filesystem::path& path) {
    try {
        return report_from_json(io::read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace shiftlab
