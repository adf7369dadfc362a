#include "cli.hpp"

#include "shiftlab/augmentation.hpp"
#include "shiftlab/bm25_index.hpp"
#include "shiftlab/datamodel.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/evaluation.hpp"
#include "shiftlab/io.hpp"
#include "shiftlab/parallel.hpp"
#include "shiftlab/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace shiftlab::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Globals {
    std::size_t workers = default_workers();
    int verbosity = 0;
};

class Log {
public:
    Log(std::ostream& err, int verbosity) : err_(err), verbosity_(verbosity) {}

    void info(const std::string& message) const {
        if (verbosity_ > 0) {
            err_ << "shiftlab: " << message << '\n';
        }
    }

private:
    std::ostream& err_;
    int verbosity_;
};

std::string fixed4(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

/// Sidecar holding the effective configuration and run statistics for
/// outputs whose own schema has no room for them.
void write_meta(const std::string& out, std::string_view command, const Json& config, const Json& stats) {
    Json meta;
    meta["command"] = std::string(command);
    meta["config"] = config;
    meta["stats"] = stats;
    io::write_file_atomic(out + ".meta.json", meta.dump(2) + "\n");
}

Corpus load_corpora(const std::vector<std::string>& paths, const Log& log) {
    if (paths.size() == 1) {
        auto corpus = load_corpus(paths.front());
        log.info("loaded " + std::to_string(corpus.size()) + " passages from " + paths.front());
        return corpus;
    }
    std::vector<Corpus> corpora;
    for (const auto& p : paths) {
        corpora.push_back(load_corpus(p));
        log.info("loaded " + std::to_string(corpora.back().size()) + " passages from " + p);
    }
    return bm25::pooled_corpus(corpora);
}

// ---------------------------------------------------------------------------
// Subcommands

struct IndexArgs {
    std::vector<std::string> corpora;
    std::string out;
    std::size_t min_len = 0;
    double k1 = 0.9;
    double b = 0.4;
    bool sentences = false;
};

void run_index(const IndexArgs& a, const Log& log) {
    const bm25::Params params{a.k1, a.b};
    const std::optional<std::size_t> min_len = a.min_len ? std::optional(a.min_len) : std::nullopt;
    std::string content;
    if (a.sentences) {
        const Corpus corpus = load_corpora(a.corpora, log);
        const auto index = bm25::build_sentence_index(corpus.passages(), params);
        log.info("indexed " + std::to_string(index.units().size()) + " sentences");
        content = bm25::serialize_index(index);
    } else if (a.corpora.size() == 1) {
        const Corpus corpus = load_corpora(a.corpora, log);
        const auto index = bm25::build_index(corpus.passages(), params, min_len);
        log.info("indexed " + std::to_string(index.n_docs()) + " passages");
        content = bm25::serialize_index(index);
    } else {
        std::vector<Corpus> corpora;
        for (const auto& p : a.corpora) {
            corpora.push_back(load_corpus(p));
        }
        const auto index = bm25::pool_corpora(corpora, params, min_len);
        log.info("pooled " + std::to_string(index.n_docs()) + " passages from " + std::to_string(corpora.size()) +
                 " corpora");
        content = bm25::serialize_index(index);
    }
    io::write_file_atomic(a.out, content);
}

struct RetrieveArgs {
    std::string index;
    std::string questions;
    std::size_t k = 100;
    std::string out;
};

void run_retrieve(const RetrieveArgs& a, const Globals& g, const Log& log) {
    const auto loaded = bm25::load_index(a.index);
    const auto questions = load_qa_pairs(a.questions);
    std::vector<std::vector<bm25::RetrievalResult>> results(questions.size());
    parallel_for(questions.size(), g.workers,
                 [&](std::size_t i) { results[i] = bm25::search(loaded.index, questions[i].question, a.k); });
    std::string content;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        Json line;
        line["question_id"] = questions[i].id;
        auto list = Json::array();
        for (const auto& r : results[i]) {
            list.push_back({{"passage_id", r.passage_id}, {"score", r.score}});
        }
        line["results"] = std::move(list);
        content += line.dump() + "\n";
    }
    io::write_file_atomic(a.out, content);
    const Json config = {{"index", a.index}, {"questions", a.questions}, {"k", a.k}, {"out", a.out}};
    write_meta(a.out, "retrieve", config, {{"questions", questions.size()}});
    log.info("retrieved top-" + std::to_string(a.k) + " for " + std::to_string(questions.size()) + " questions");
}

struct DiagnoseArgs {
    std::string scores;
    std::string likelihoods;
    std::optional<double> reference;
    std::string reference_likelihoods;
    double tau_reader = 0.1;
    double tau_retriever = 0.0;
    std::string mode = "exponentiated";
    std::string out = "report.json";
};

void run_diagnose(const DiagnoseArgs& a, const Globals& g, std::ostream& out, const Log& log) {
    diagnostics::ClassifierConfig config;
    config.tau_reader = a.tau_reader;
    config.tau_retriever = a.tau_retriever;
    config.mode = diagnostics::normalization_mode_from_string(a.mode);
    diagnostics::Reference reference;
    if (a.reference) {
        reference = diagnostics::Reference::from_value(*a.reference);
    } else {
        const auto source = load_answer_likelihoods(a.reference_likelihoods);
        if (source.empty()) {
            throw DataError(a.reference_likelihoods + ": no answer likelihood records");
        }
        reference = diagnostics::Reference::from_records(source, a.reference_likelihoods);
    }
    const auto report = diagnostics::diagnose(a.scores, a.likelihoods, reference, config, g.workers);
    const Json echo = {{"scores", a.scores}, {"likelihoods", a.likelihoods}, {"reference", reference.d_u_r},
                       {"out", a.out}};
    save_report(report, a.out, echo.dump());
    log.info("wrote " + a.out);
    out << render_report(report);
}

struct ClozeArgs {
    std::string entities;
    std::string strategy = "uniform-over-types";
    std::size_t n = 50000;
    std::string index;
    std::uint64_t seed = 0;
    std::string sentinel = std::string(augment::kDefaultSentinel);
    std::string target_distribution;
    std::string out;
};

void run_cloze(const ClozeArgs& a, const Globals& g, const Log& log) {
    const auto catalog = load_entities(a.entities);
    const auto sentences = bm25::load_sentence_index(a.index);
    augment::SamplingStrategy strategy{augment::sampling_kind_from_string(a.strategy), {}};
    if (!a.target_distribution.empty()) {
        const auto j = nlohmann::json::parse(io::read_file(a.target_distribution), nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw DataError(a.target_distribution + ": expected a JSON object of type -> probability");
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!it.value().is_number()) {
                throw DataError(a.target_distribution + ": probability for '" + it.key() + "' is not a number");
            }
            strategy.target_type_distribution[it.key()] = it.value().get<double>();
        }
    }
    const auto dataset =
        augment::generate_cloze_dataset(catalog, strategy, a.n, sentences, a.seed, a.sentinel, g.workers);
    const auto pairs = augment::to_qa_pairs(dataset.examples);
    io::write_file_atomic(a.out, to_jsonl_document<QAPair>(pairs));
    const Json config = {{"entities", a.entities}, {"strategy", a.strategy}, {"n", a.n},
                         {"index", a.index},       {"seed", a.seed},         {"sentinel", a.sentinel},
                         {"target_distribution", a.target_distribution},   {"out", a.out}};
    const Json stats = {{"requested", dataset.stats.requested},
                        {"emitted", dataset.stats.emitted},
                        {"skipped_absent", dataset.stats.skipped_absent},
                        {"skipped_unusable", dataset.stats.skipped_unusable}};
    write_meta(a.out, "augment cloze", config, stats);
    log.info("emitted " + std::to_string(dataset.stats.emitted) + " cloze examples");
}

struct FilterArgs {
    std::string passages;
    std::string generations;
    double min_overlap = 0.75;
    std::size_t min_span = 5;
    std::string out;
    std::string entities;
    std::string cloze_out;
    std::string sentinel = std::string(augment::kDefaultSentinel);
};

void run_filter(const FilterArgs& a, const Log& log) {
    const Corpus corpus = load_corpus(a.passages);
    const auto generations = augment::load_generations(a.generations);
    std::optional<EntityCatalog> catalog;
    if (!a.entities.empty()) {
        catalog.emplace(load_entities(a.entities));
    }
    const augment::FilterOptions options{a.min_overlap, a.min_span};
    std::string verdicts;
    std::vector<augment::ClozeExample> clozes;
    std::size_t accepted = 0;
    for (const auto& gen : generations) {
        const Passage* passage = corpus.find(gen.passage_id);
        if (!passage) {
            throw DataError(a.generations + ": generation refers to unknown passage '" + gen.passage_id + "'");
        }
        const auto verdict = augment::fewshot_filter(passage->text, gen.text, options);
        Json line;
        line["passage_id"] = gen.passage_id;
        line["accepted"] = verdict.accepted;
        line["reason"] = std::string(augment::to_string(verdict.reason));
        line["overlap"] = verdict.overlap;
        verdicts += line.dump() + "\n";
        if (verdict.accepted) {
            ++accepted;
            if (catalog) {
                if (auto ex = augment::cloze_from_generated(passage->text, gen.text, *catalog, a.sentinel, options)) {
                    ex->source_passage_id = gen.passage_id;
                    clozes.push_back(std::move(*ex));
                }
            }
        }
    }
    io::write_file_atomic(a.out, verdicts);
    if (!a.cloze_out.empty()) {
        const auto pairs = augment::to_qa_pairs(clozes, "gen-cloze-");
        io::write_file_atomic(a.cloze_out, to_jsonl_document<QAPair>(pairs));
    }
    const Json config = {{"passages", a.passages}, {"generations", a.generations}, {"min_overlap", a.min_overlap},
                         {"min_span", a.min_span}, {"entities", a.entities},       {"cloze_out", a.cloze_out},
                         {"sentinel", a.sentinel}, {"out", a.out}};
    write_meta(a.out, "filter", config,
               {{"generations", generations.size()}, {"accepted", accepted}, {"cloze_examples", clozes.size()}});
    log.info("accepted " + std::to_string(accepted) + " of " + std::to_string(generations.size()) + " generations");
}

struct IngestArgs {
    std::string pairs;
    std::string corpus;
    std::string out;
};

void run_ingest(const IngestArgs& a, const Log& log) {
    const Corpus corpus = load_corpus(a.corpus);
    const auto ingest = augment::ingest_qgen_pairs(a.pairs, corpus);
    io::write_file_atomic(a.out, to_jsonl_document<QAPair>(ingest.pairs));
    const Json config = {{"pairs", a.pairs}, {"corpus", a.corpus}, {"out", a.out}};
    write_meta(a.out, "ingest-qgen", config,
               {{"ingested", ingest.pairs.size()},
                {"dropped_missing_answer", ingest.dropped_missing_answer},
                {"dropped_unknown_passage", ingest.dropped_unknown_passage}});
    log.info("ingested " + std::to_string(ingest.pairs.size()) + " pairs, dropped " +
             std::to_string(ingest.dropped_missing_answer + ingest.dropped_unknown_passage));
}

struct EvalArgs {
    std::string retrievals;
    std::string predictions;
    std::string qa;
    std::vector<std::string> corpora;
    std::size_t k = 100;
    bool oracle_passages = false;
    std::string out = "eval.json";
};

void run_eval(const EvalArgs& a, const Log& log) {
    const Corpus corpus = load_corpora(a.corpora, log);
    const auto questions = load_qa_pairs(a.qa);
    const auto predictions = eval::load_predictions(a.predictions);
    const auto retrievals = a.oracle_passages ? eval::oracle_retrievals(questions) : eval::load_retrievals(a.retrievals);
    auto result = eval::evaluate(retrievals, corpus, questions, predictions, a.k);
    const bool all_boolean = !questions.empty() && std::all_of(questions.begin(), questions.end(), [](const QAPair& q) {
        return q.style == QuestionStyle::Boolean;
    });
    if (all_boolean) {
        result.majority_baseline = eval::majority_baseline(questions);
    }
    const Json config = {{"retrievals", a.retrievals}, {"predictions", a.predictions}, {"qa", a.qa},
                         {"corpus", a.corpora},        {"k", a.k},
                         {"oracle_passages", a.oracle_passages},                      {"out", a.out}};
    io::write_file_atomic(a.out, eval::eval_result_to_json(result, config.dump()));
    log.info("Acc@" + std::to_string(a.k) + " = " + fixed4(result.acc_at_k) + ", F1 = " + fixed4(result.mean_f1));
}

struct AuditArgs {
    std::string eval;
    std::size_t sample = eval::kDefaultAuditSample;
    std::uint64_t seed = 0;
    double f1_threshold = eval::kDefaultAuditF1Threshold;
    std::string out;
};

void run_audit(const AuditArgs& a, const Log& log) {
    const auto result = eval::eval_result_from_json(io::read_file(a.eval));
    const auto cases = eval::audit_false_positives(result, a.sample, a.f1_threshold, a.seed);
    std::string content;
    for (const auto& c : cases) {
        content += eval::to_jsonl(c) + "\n";
    }
    io::write_file_atomic(a.out, content);
    const Json config = {
        {"eval", a.eval}, {"sample", a.sample}, {"seed", a.seed}, {"f1_threshold", a.f1_threshold}, {"out", a.out}};
    write_meta(a.out, "audit", config, {{"cases", cases.size()}});
    log.info("sampled " + std::to_string(cases.size()) + " audit cases");
}

struct ReportArgs {
    std::string in;
    std::string out;
};

void run_report(const ReportArgs& a, std::ostream& out) {
    const auto report = load_report(a.in);
    const std::string text = render_report(report);
    if (a.out.empty()) {
        out << text;
    } else {
        io::write_file_atomic(a.out, text);
    }
}

const CLI::App* deepest_parsed(const CLI::App& app) {
    for (const CLI::App* sub : app.get_subcommands()) {
        return deepest_parsed(*sub);
    }
    return &app;
}

} // namespace

std::string render_report(const diagnostics::DiagnosticReport& report) {
    const auto& s = report.statistics;
    std::string out;
    out += "retriever_stat  reader_stat  label      recommendation\n";
    char row[512];
    std::snprintf(row, sizeof row, "%-14s  %-11s  %-9s  %s\n", fixed4(s.retriever_stat).c_str(),
                  fixed4(s.reader_stat).c_str(), std::string(to_string(report.label)).c_str(),
                  report.recommendation.c_str());
    out += row;
    out += "\n";
    out += "retriever: d_u_t " + fixed4(s.d_u_t) + "  d_g_t " + fixed4(s.d_g_t) + "  (" +
           std::to_string(s.n_examples) + " questions)\n";
    out += "reader:    d_u_r " + fixed4(s.d_u_r) + "  d_u_t " + fixed4(s.reader_d_u_t) + "  (" +
           std::to_string(s.n_reader_examples) + " questions)\n";
    out += "config:    tau_retriever " + fixed4(report.config.tau_retriever) + "  tau_reader " +
           fixed4(report.config.tau_reader) + "  mode " + std::string(to_string(report.config.mode)) +
           "  reference " + report.reference_source + "\n";
    return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dataset-shift diagnostics, data augmentation and evaluation for open-domain QA", "shiftlab"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    const char* env_config = std::getenv("SHIFTLAB_CONFIG");
    app.set_config("--config", env_config ? env_config : "", "TOML/INI config file (default: $SHIFTLAB_CONFIG)");
    app.require_subcommand(1);

    Globals g;
    app.add_option("--workers", g.workers, "Worker threads for batch retrieval and diagnostics")
        ->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", g.verbosity, "Log progress to stderr");

    IndexArgs index_args;
    auto* index_cmd = app.add_subcommand("index", "Build a BM25 index over one or more corpora");
    index_cmd->add_option("--corpus", index_args.corpora, "Passage JSONL (repeat to pool corpora)")->required();
    index_cmd->add_option("--out", index_args.out, "Index file to write")->required();
    index_cmd->add_option("--min-len", index_args.min_len, "Drop passages with fewer tokens (0 disables; 50 is typical)");
    index_cmd->add_option("--k1", index_args.k1, "BM25 k1")->check(CLI::PositiveNumber);
    index_cmd->add_option("--b", index_args.b, "BM25 b")->check(CLI::Range(0.0, 1.0));
    index_cmd->add_flag("--sentences", index_args.sentences, "Index sentences instead of passages");

    RetrieveArgs retrieve_args;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Run BM25 top-k retrieval for a question file");
    retrieve_cmd->add_option("--index", retrieve_args.index)->required();
    retrieve_cmd->add_option("--questions", retrieve_args.questions, "QA JSONL")->required();
    retrieve_cmd->add_option("--k", retrieve_args.k)->check(CLI::PositiveNumber);
    retrieve_cmd->add_option("--out", retrieve_args.out)->required();

    DiagnoseArgs diagnose_args;
    auto* diagnose_cmd = app.add_subcommand("diagnose", "Classify the shift between a source model and a target set");
    diagnose_cmd->add_option("--scores", diagnose_args.scores, "Retriever score-matrix JSONL")->required();
    diagnose_cmd->add_option("--likelihoods", diagnose_args.likelihoods, "Answer-likelihood JSONL")->required();
    auto* ref_value = diagnose_cmd->add_option("--reference", diagnose_args.reference,
                                               "Reference reader distance from uniform (d_u_r)");
    ref_value->check(CLI::NonNegativeNumber);
    auto* ref_file = diagnose_cmd->add_option("--reference-likelihoods", diagnose_args.reference_likelihoods,
                                              "Source-domain likelihood JSONL to compute d_u_r from");
    ref_value->excludes(ref_file);
    diagnose_cmd->add_option("--tau-reader", diagnose_args.tau_reader)->check(CLI::PositiveNumber);
    diagnose_cmd->add_option("--tau-retriever", diagnose_args.tau_retriever);
    diagnose_cmd->add_option("--mode", diagnose_args.mode)->check(CLI::IsMember({"ratio", "exponentiated"}));
    diagnose_cmd->add_option("--out", diagnose_args.out);

    auto* augment_cmd = app.add_subcommand("augment", "Zero-shot data augmentation");
    augment_cmd->require_subcommand(1);
    ClozeArgs cloze_args;
    auto* cloze_cmd = augment_cmd->add_subcommand("cloze", "Generate cloze questions from sampled entity answers");
    cloze_cmd->add_option("--entities", cloze_args.entities, "Entity catalog JSONL")->required();
    cloze_cmd->add_option("--strategy", cloze_args.strategy)
        ->check(CLI::IsMember({"most-frequent", "uniform-over-types", "random", "proportional"}));
    cloze_cmd->add_option("--n", cloze_args.n)->check(CLI::PositiveNumber);
    cloze_cmd->add_option("--index", cloze_args.index, "Sentence-level index (index --sentences)")->required();
    cloze_cmd->add_option("--seed", cloze_args.seed)->required();
    cloze_cmd->add_option("--sentinel", cloze_args.sentinel);
    cloze_cmd->add_option("--target-distribution", cloze_args.target_distribution,
                          "JSON object of entity type -> probability (proportional strategy)");
    cloze_cmd->add_option("--out", cloze_args.out)->required();

    FilterArgs filter_args;
    auto* filter_cmd = app.add_subcommand("filter", "Apply the few-shot generation filter");
    filter_cmd->add_option("--passages", filter_args.passages, "Passage JSONL")->required();
    filter_cmd->add_option("--generations", filter_args.generations, "Generation JSONL")->required();
    filter_cmd->add_option("--min-overlap", filter_args.min_overlap)->check(CLI::Range(0.0, 1.0));
    filter_cmd->add_option("--min-span", filter_args.min_span)->check(CLI::PositiveNumber);
    filter_cmd->add_option("--out", filter_args.out)->required();
    auto* filter_entities = filter_cmd->add_option("--entities", filter_args.entities,
                                                   "Entity catalog used to turn accepted generations into cloze QA");
    filter_cmd->add_option("--cloze-out", filter_args.cloze_out)->needs(filter_entities);
    filter_cmd->add_option("--sentinel", filter_args.sentinel);

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest-qgen", "Validate externally generated question/answer pairs");
    ingest_cmd->add_option("--pairs", ingest_args.pairs)->required();
    ingest_cmd->add_option("--corpus", ingest_args.corpus)->required();
    ingest_cmd->add_option("--out", ingest_args.out)->required();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Acc@k and token F1");
    auto* eval_retrievals = eval_cmd->add_option("--retrievals", eval_args.retrievals);
    eval_cmd->add_option("--predictions", eval_args.predictions)->required();
    eval_cmd->add_option("--qa", eval_args.qa)->required();
    eval_cmd->add_option("--corpus", eval_args.corpora)->required();
    eval_cmd->add_option("--k", eval_args.k)->check(CLI::PositiveNumber);
    auto* eval_oracle =
        eval_cmd->add_flag("--oracle-passages", eval_args.oracle_passages, "Use gold passages as the retrieval list");
    eval_retrievals->excludes(eval_oracle);
    eval_cmd->add_option("--out", eval_args.out);

    AuditArgs audit_args;
    auto* audit_cmd = app.add_subcommand("audit", "Sample false-positive hits for manual review");
    audit_cmd->add_option("--eval", audit_args.eval)->required();
    audit_cmd->add_option("--sample", audit_args.sample)->check(CLI::PositiveNumber);
    audit_cmd->add_option("--seed", audit_args.seed)->required();
    audit_cmd->add_option("--f1-threshold", audit_args.f1_threshold)->check(CLI::Range(0.0, 1.0));
    audit_cmd->add_option("--out", audit_args.out)->required();

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "Render a diagnostic report as text");
    report_cmd->add_option("--in", report_args.in)->required();
    report_cmd->add_option("--out", report_args.out);

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("shiftlab");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (diagnose_cmd->parsed() && !diagnose_args.reference && diagnose_args.reference_likelihoods.empty()) {
            throw CLI::RequiredError("--reference or --reference-likelihoods");
        }
        if (eval_cmd->parsed() && !eval_args.oracle_passages && eval_args.retrievals.empty()) {
            throw CLI::RequiredError("--retrievals or --oracle-passages");
        }
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n" << deepest_parsed(app)->help();
        return kExitUsage;
    }

    const Log log(err, g.verbosity);
    try {
        if (index_cmd->parsed()) {
            run_index(index_args, log);
        } else if (retrieve_cmd->parsed()) {
            run_retrieve(retrieve_args, g, log);
        } else if (diagnose_cmd->parsed()) {
            run_diagnose(diagnose_args, g, out, log);
        } else if (cloze_cmd->parsed()) {
            run_cloze(cloze_args, g, log);
        } else if (filter_cmd->parsed()) {
            run_filter(filter_args, log);
        } else if (ingest_cmd->parsed()) {
            run_ingest(ingest_args, log);
        } else if (eval_cmd->parsed()) {
            run_eval(eval_args, log);
        } else if (audit_cmd->parsed()) {
            run_audit(audit_args, log);
        } else if (report_cmd->parsed()) {
            run_report(report_args, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomainError;
    }
    return kExitOk;
}

} // namespace shiftlab::cli
