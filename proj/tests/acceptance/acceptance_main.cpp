// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include "cases.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

#include "shiftlab/augmentation.hpp"
#include "shiftlab/bm25_index.hpp"
#include "shiftlab/evaluation.hpp"
#include "shiftlab/parallel.hpp"
#include "shiftlab/shift_diagnostics.hpp"
#include "shiftlab/text.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace shiftlab;
namespace st = shiftlab::testkit;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome table_replay() {
    struct Row {
        const char* dataset;
        double retriever;
        double reader;
        ShiftLabel label;
    };
    const std::vector<Row> rows{
        {"BioASQ", 0.3027, 0.1765, ShiftLabel::LabelShift},   {"CliCR", -0.8839, 0.2352, ShiftLabel::FullShift},
        {"Quasar-S", -0.6697, 0.0767, ShiftLabel::CovariateShift}, {"Quasar-T", 0.2016, 0.1694, ShiftLabel::LabelShift},
        {"NewsQA", -0.1967, 0.1800, ShiftLabel::FullShift},   {"SearchQA", 0.6165, -0.0063, ShiftLabel::NoShift},
    };
    const auto start = Clock::now();
    const diagnostics::ClassifierConfig config;
    int ok = 0;
    std::string misses;
    for (const auto& r : rows) {
        ShiftStatistics s;
        s.retriever_stat = r.retriever;
        s.reader_stat = r.reader;
        const auto got = diagnostics::classify_shift(s, config);
        if (got == r.label) {
            ++ok;
        } else {
            misses += std::string(" ") + r.dataset + "->" + std::string(to_string(got));
        }
    }
    const double t = seconds_since(start);
    return {ok == 6 && t < 1.0, fmt("%d/6 labels, %.4f s%s", ok, t, misses.c_str())};
}

Outcome quadrant_suite() {
    int agree = 0;
    int total = 0;
    std::map<std::string, int> misses;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        for (bool sharp : {true, false}) {
            for (bool matched : {true, false}) {
                const auto qc = st::make_quadrant(sharp, matched, seed * 4 + (sharp ? 2 : 0) + (matched ? 1 : 0));
                const auto report =
                    diagnostics::diagnose(qc.scores, qc.likelihoods,
                                          diagnostics::Reference::from_records(qc.reference, "synthetic"),
                                          diagnostics::ClassifierConfig{});
                ++total;
                if (report.label == qc.expected) {
                    ++agree;
                } else {
                    ++misses[std::string(to_string(qc.expected))];
                }
            }
        }
    }
    std::string detail = fmt("%d/%d designed labels over 100 seeds", agree, total);
    for (const auto& [label, n] : misses) {
        detail += fmt(", %s missed %d", label.c_str(), n);
    }
    return {agree == total, detail};
}

Outcome bm25_oracle() {
    // Only library time counts against the budget; the oracle is a full scan.
    double library_seconds = 0.0;
    auto timed = [&](auto&& fn) {
        const auto start = Clock::now();
        auto r = fn();
        library_seconds += seconds_since(start);
        return r;
    };
    const auto corpus = st::random_corpus(2024, 1000, 400, 5, 80);
    const auto index = timed([&] { return bm25::build_index(corpus.passages); });
    Rng rng(2025);
    int id_mismatch = 0;
    double worst = 0.0;
    for (int q = 0; q < 200; ++q) {
        const auto query = st::random_query(rng, 450, 2 + rng.below(6));
        const auto got = timed([&] { return bm25::search_tokens(index, query, 10); });
        const auto want = st::oracle_rank(corpus.docs, query, 10, 0.9, 0.4);
        bool same = got.size() == want.size();
        for (std::size_t i = 0; same && i < got.size(); ++i) {
            same = got[i].passage_id == want[i].first;
            worst = std::max(worst, std::fabs(got[i].score - want[i].second));
        }
        id_mismatch += !same;
    }
    return {id_mismatch == 0 && worst <= 1e-9 && library_seconds < 30.0,
            fmt("%d/200 queries with identical top-10 ids, max |score diff| %.3g, build+search %.3f s",
                200 - id_mismatch, worst, library_seconds)};
}

Outcome distance_properties() {
    Rng rng(99);
    constexpr double tol = 1e-12;
    int violations = 0;
    double worst_oracle = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t k = 2 + rng.below(255);
        const auto p = st::random_simplex(rng, k);
        const auto q = st::random_simplex(rng, k);
        const auto r = st::random_simplex(rng, k);
        const double pq = diagnostics::distance(p, q);
        const double qp = diagnostics::distance(q, p);
        const bool ok = pq >= 0.0 && diagnostics::distance(p, p) == 0.0 && std::fabs(pq - qp) <= tol &&
                        pq <= diagnostics::distance(p, r) + diagnostics::distance(r, q) + tol &&
                        (p == q || pq > 0.0);
        violations += !ok;
        worst_oracle = std::max(worst_oracle, std::fabs(pq - static_cast<double>(st::oracle_tv(p, q))));
    }
    int inexact = 0;
    for (std::size_t k = 2; k <= 256; ++k) {
        const double expect = static_cast<double>(k - 1) / static_cast<double>(k);
        std::vector<double> hot(k, 0.0);
        hot[k / 3] = 1.0;
        const std::vector<double> flat(k, 1.0 / static_cast<double>(k));
        inexact += diagnostics::distance_to_uniform(hot) != expect;
        inexact += std::fabs(diagnostics::distance_to_one_hot(flat, k / 3) - expect) >
                   std::nextafter(expect, 2.0) - expect;
    }
    return {violations == 0 && worst_oracle <= tol && inexact == 0,
            fmt("%d/10000 pairs violate a metric axiom, max |TV - oracle| %.3g, %d one-hot/uniform cases off (K-1)/K "
                "for K=2..256",
                violations, worst_oracle, inexact)};
}

Outcome metric_oracles() {
    int table_ok = 0;
    for (const auto& c : st::token_f1_table()) {
        table_ok += std::fabs(eval::token_f1(c.prediction, c.golds) - c.expected) <= 1e-12;
    }
    const std::vector<std::string> gold{"High altitude exposure"};
    const bool three_token = std::fabs(eval::token_f1("exposure to high altitude", gold) - 6.0 / 7.0) <= 1e-12;

    Rng rng(7);
    const auto inst = st::random_acc_instance(rng, 20, 40, 20);
    const auto result = eval::acc_at_k(inst.retrievals, inst.corpus, inst.questions, 20);
    int scan_agree = 0;
    for (std::size_t q = 0; q < inst.questions.size(); ++q) {
        bool hit = false;
        for (const auto& pid : inst.retrievals[q].passage_ids) {
            for (const auto& a : inst.questions[q].answers) {
                hit = hit || st::oracle_contains(eval::normalize_answer(inst.corpus.find(pid)->text),
                                                 eval::normalize_answer(a));
            }
        }
        scan_agree += hit == result.per_question[q].hit;
    }

    int monotone = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = st::random_acc_instance(rng, 4, 15, 12);
        double prev = -1.0;
        bool ok = true;
        for (std::size_t k = 1; k <= 12; ++k) {
            const double acc = eval::acc_at_k(r.retrievals, r.corpus, r.questions, k).acc_at_k;
            ok = ok && acc >= prev;
            prev = acc;
        }
        monotone += ok;
    }
    const bool pass = table_ok == 25 && three_token && scan_agree == 20 && monotone == 1000;
    return {pass, fmt("token_f1 %d/25 (6/7 case %s), acc@k scan %d/20, monotone %d/1000", table_ok,
                      three_token ? "ok" : "wrong", scan_agree, monotone)};
}

Outcome cloze_invariants() {
    const auto world = st::make_cloze_world(314, 600, 200);
    const Corpus corpus(world.passages);
    const auto index = bm25::build_sentence_index(world.passages);
    const EntityCatalog catalog(world.mentions);
    const auto ds = augment::generate_cloze_dataset(catalog, augment::SamplingStrategy::random(), 5000, index, 2718,
                                                    augment::kDefaultSentinel, default_workers());
    int absent = 0;
    int sentinel = 0;
    int rebuilt = 0;
    for (const auto& ex : ds.examples) {
        absent += text::case_fold(ex.question).find(text::case_fold(ex.answer)) == std::string::npos;
        sentinel += ex.question.find(augment::kDefaultSentinel) != std::string::npos;
        // Substitute by hand, left to right.
        std::string q = ex.question;
        for (std::size_t pos = q.find("__"); pos != std::string::npos; pos = q.find("__", pos + ex.answer.size())) {
            q.replace(pos, 2, ex.answer);
        }
        const Passage* p = corpus.find(ex.source_passage_id);
        rebuilt += p && q == span_text(p->text, ex.sentence_span);
    }
    const int n = static_cast<int>(ds.examples.size());
    return {n == 5000 && absent == n && sentinel == n && rebuilt == n,
            fmt("%d examples: answer absent %d, sentinel present %d, exact reconstruction %d (skipped %zu absent, "
                "%zu unusable)",
                n, absent, sentinel, rebuilt, ds.stats.skipped_absent, ds.stats.skipped_unusable)};
}

Outcome sampling_distributions() {
    std::vector<EntityMention> mentions{{"Solo", "RARE", 1}};
    for (int i = 0; i < 99; ++i) {
        mentions.push_back({"member" + std::to_string(i), "COMMON", 1});
    }
    const EntityCatalog catalog(mentions);
    auto counts = [](const std::vector<augment::SampledAnswer>& draws) {
        std::size_t rare = 0;
        for (const auto& d : draws) {
            rare += d.entity_type == "RARE";
        }
        return std::vector<std::size_t>{draws.size() - rare, rare};
    };
    const auto uniform = counts(augment::sample_answers(catalog, augment::SamplingStrategy::uniform_over_types(),
                                                        50000, 1234));
    const auto random = counts(augment::sample_answers(catalog, augment::SamplingStrategy::random(), 50000, 1234));
    const auto [u_stat, u_p] = st::chi_square_test(uniform, {0.5, 0.5});
    const auto [r_stat, r_p] = st::chi_square_test(random, {0.99, 0.01});
    return {u_p > 0.01 && r_p > 0.01,
            fmt("uniform-over-types %zu/%zu chi2=%.3f p=%.3f; random %zu/%zu vs 99:1 chi2=%.3f p=%.3f", uniform[0],
                uniform[1], u_stat, u_p, random[0], random[1], r_stat, r_p)};
}

Outcome filter_suite() {
    int ok = 0;
    std::string misses;
    for (const auto& c : st::filter_suite()) {
        const auto v = augment::fewshot_filter(st::filter_passage(), c.generated);
        if (!v.accepted && v.reason == c.expected) {
            ++ok;
        } else {
            misses += " " + c.name + "->" + std::string(augment::to_string(v.reason));
        }
    }
    const int n = static_cast<int>(st::filter_suite().size());
    return {ok == 30 && n == 30, fmt("%d/%d first-violation reasons%s", ok, n, misses.c_str())};
}

Outcome determinism() {
    st::TempDir dir;
    const auto inputs = st::write_pipeline_inputs(dir);
    const auto steps = st::pipeline_steps(inputs, dir);
    int identical = 0;
    std::string misses;
    for (const auto& step : steps) {
        const auto first = st::run_cli(step.args);
        std::vector<std::string> first_bytes;
        for (const auto& out : step.outputs) {
            first_bytes.push_back(first.code == 0 ? st::slurp(out) : "");
        }
        const auto second = st::run_cli(step.args);
        bool same = first.code == 0 && second.code == 0 && first.out == second.out;
        for (std::size_t i = 0; same && i < step.outputs.size(); ++i) {
            same = st::slurp(step.outputs[i]) == first_bytes[i];
        }
        if (same) {
            ++identical;
        } else {
            misses += " " + step.name + (first.code ? "(exit " + std::to_string(first.code) + ")" : "");
        }
    }
    const int n = static_cast<int>(steps.size());
    return {identical == n, fmt("%d/%d subcommand runs byte-identical%s", identical, n, misses.c_str())};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"table-replay", table_replay},
        {"quadrant-suite", quadrant_suite},
        {"bm25-oracle", bm25_oracle},
        {"distance-properties", distance_properties},
        {"metric-oracles", metric_oracles},
        {"cloze-invariants", cloze_invariants},
        {"sampling-distributions", sampling_distributions},
        {"fewshot-filter", filter_suite},
        {"determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %-24s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
