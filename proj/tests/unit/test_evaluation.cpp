#include "cases.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "shiftlab/error.hpp"
#include "shiftlab/evaluation.hpp"

#include <gtest/gtest.h>

using namespace shiftlab;
using namespace shiftlab::eval;
using shiftlab::testkit::TempDir;

namespace {

QAPair qa(std::string id, std::vector<std::string> answers, QuestionStyle style = QuestionStyle::Natural) {
    return {std::move(id), "question?", std::move(answers), {}, style};
}

} // namespace

TEST(NormalizeAnswer, Examples) {
    EXPECT_EQ(normalize_answer("The Oval Office."), "oval office");
    EXPECT_EQ(normalize_answer("tetanus"), "tetanus");
    EXPECT_EQ(normalize_answer("A  B"), "b");
    EXPECT_EQ(normalize_answer("  An\tapple,\n the END!  "), "apple end");
    EXPECT_EQ(normalize_answer(""), "");
}

TEST(TokenF1, HandTable) {
    const auto& table = testkit::token_f1_table();
    ASSERT_EQ(table.size(), 25u);
    for (const auto& c : table) {
        EXPECT_NEAR(token_f1(c.prediction, c.golds), c.expected, 1e-12) << c.prediction;
    }
    const std::vector<std::string> gold{"High altitude exposure"};
    EXPECT_NEAR(token_f1("exposure to high altitude", gold), 0.857, 1e-3);
}

TEST(TokenF1, SymmetricBoundedAndExactOnlyForEqualMultisets) {
    Rng rng(3);
    const std::vector<std::string> vocab{"a", "oval", "office", "the", "dow", "jones", "x", "y"};
    auto phrase = [&] {
        std::string s;
        const std::size_t n = rng.below(5);
        for (std::size_t i = 0; i < n; ++i) {
            s += vocab[rng.below(vocab.size())] + " ";
        }
        return s;
    };
    auto sorted_tokens = [](const std::string& s) {
        std::vector<std::string> t;
        std::istringstream in(normalize_answer(s));
        for (std::string w; in >> w;) {
            t.push_back(w);
        }
        std::sort(t.begin(), t.end());
        return t;
    };
    for (int trial = 0; trial < 2000; ++trial) {
        const auto x = phrase();
        const auto y = phrase();
        const double xy = token_f1(x, std::vector<std::string>{y});
        EXPECT_EQ(xy, token_f1(y, std::vector<std::string>{x}));
        EXPECT_GE(xy, 0.0);
        EXPECT_LE(xy, 1.0);
        EXPECT_EQ(xy == 1.0, sorted_tokens(x) == sorted_tokens(y)) << "'" << x << "' vs '" << y << "'";
    }
}

TEST(ContainsAnswer, TokenBoundaries) {
    EXPECT_TRUE(contains_answer(normalize_answer("A tunnel reached the Oval Office."), "oval"));
    EXPECT_FALSE(contains_answer(normalize_answer("Snow removal began."), "oval"));
    EXPECT_TRUE(contains_answer(normalize_answer("the oval office"), "The Oval Office"));
    EXPECT_FALSE(contains_answer(normalize_answer("anything"), "the"));
}

TEST(AccAtK, RankBoundary) {
    const Corpus corpus({{"p1", "c", "Tetanus is also lockjaw.", {}}, {"p2", "c", "Nothing relevant.", {}},
                         {"p3", "c", "Nothing at all.", {}}});
    const std::vector<QAPair> qs{qa("q1", {"lockjaw"}), qa("q2", {"lockjaw"})};
    const std::vector<RankedList> rl{{"q1", {"p1", "p2"}}, {"q2", {"p2", "p3", "p1"}}};
    const auto r = acc_at_k(rl, corpus, qs, 2);
    EXPECT_TRUE(r.per_question[0].hit);
    EXPECT_EQ(r.per_question[0].matched_passage_id, "p1");
    EXPECT_FALSE(r.per_question[1].hit);
    EXPECT_DOUBLE_EQ(r.acc_at_k, 0.5);
    EXPECT_DOUBLE_EQ(acc_at_k(rl, corpus, qs, 3).acc_at_k, 1.0);
}

TEST(AccAtK, UnknownPassageAndMissingListThrow) {
    const Corpus corpus({{"p1", "c", "text", {}}});
    const std::vector<QAPair> qs{qa("q1", {"text"})};
    EXPECT_THROW(acc_at_k(std::vector<RankedList>{{"q1", {"p9"}}}, corpus, qs, 1), DataError);
    EXPECT_THROW(acc_at_k(std::vector<RankedList>{}, corpus, qs, 1), DataError);
    EXPECT_THROW(acc_at_k(std::vector<RankedList>{{"q1", {"p1"}}}, corpus, qs, 0), DataError);
}

TEST(AccAtK, MatchesFullContainmentScan) {
    Rng rng(13);
    const auto inst = testkit::random_acc_instance(rng, 20, 30, 15);
    for (std::size_t k : {1u, 3u, 10u, 15u}) {
        const auto r = acc_at_k(inst.retrievals, inst.corpus, inst.questions, k);
        std::size_t hits = 0;
        for (std::size_t q = 0; q < inst.questions.size(); ++q) {
            bool hit = false;
            for (std::size_t i = 0; i < k && !hit; ++i) {
                const auto& text = inst.corpus.find(inst.retrievals[q].passage_ids[i])->text;
                for (const auto& a : inst.questions[q].answers) {
                    hit = hit || testkit::oracle_contains(normalize_answer(text), normalize_answer(a));
                }
            }
            EXPECT_EQ(r.per_question[q].hit, hit);
            hits += hit;
        }
        EXPECT_DOUBLE_EQ(r.acc_at_k, static_cast<double>(hits) / 20.0);
    }
}

TEST(AccAtK, MonotoneInK) {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = testkit::random_acc_instance(rng, 5, 12, 10);
        double prev = 0.0;
        for (std::size_t k = 1; k <= 10; ++k) {
            const double acc = acc_at_k(inst.retrievals, inst.corpus, inst.questions, k).acc_at_k;
            EXPECT_GE(acc, prev);
            prev = acc;
        }
    }
}

TEST(Evaluate, AggregatesAreMeansAndPredictionsRequired) {
    Rng rng(19);
    const auto inst = testkit::random_acc_instance(rng, 40, 20, 5);
    std::map<std::string, std::string, std::less<>> preds;
    for (const auto& q : inst.questions) {
        preds[q.id] = rng.below(2) ? q.answers[0] : "stone river";
    }
    const auto r = evaluate(inst.retrievals, inst.corpus, inst.questions, preds, 5);
    long double hits = 0, f1 = 0;
    for (const auto& q : r.per_question) {
        hits += q.hit;
        f1 += q.f1;
    }
    EXPECT_NEAR(r.acc_at_k, static_cast<double>(hits / 40), 1e-12);
    EXPECT_NEAR(r.mean_f1, static_cast<double>(f1 / 40), 1e-12);
    EXPECT_EQ(r.n_questions, 40u);
    preds.erase("q0");
    EXPECT_THROW(evaluate(inst.retrievals, inst.corpus, inst.questions, preds, 5), DataError);
}

TEST(Evaluate, OracleRetrievalsUseGoldPassages) {
    const Corpus corpus({{"p1", "c", "Yes, the statute applies.", {}}, {"p2", "c", "Unrelated.", {}}});
    QAPair q = qa("q1", {"statute"});
    q.gold_passage_ids = {"p1"};
    const std::vector<QAPair> qs{q};
    const auto rl = oracle_retrievals(qs);
    ASSERT_EQ(rl.size(), 1u);
    EXPECT_EQ(rl[0].passage_ids, std::vector<std::string>{"p1"});
    EXPECT_TRUE(acc_at_k(rl, corpus, qs, 100).per_question[0].hit);
}

TEST(MajorityBaseline, Counting) {
    std::vector<QAPair> qs;
    for (int i = 0; i < 100; ++i) {
        qs.push_back(qa("q" + std::to_string(i), {i < 51 ? "yes" : "no"}, QuestionStyle::Boolean));
    }
    EXPECT_DOUBLE_EQ(majority_baseline(qs), 0.51);
    for (auto& q : qs) {
        q.answers = {"no"};
    }
    EXPECT_DOUBLE_EQ(majority_baseline(qs), 1.0);

    std::vector<QAPair> coliee;
    for (int i = 0; i < 10000; ++i) {
        coliee.push_back(qa("c" + std::to_string(i), {i < 5095 ? "no" : "yes"}, QuestionStyle::Boolean));
    }
    EXPECT_DOUBLE_EQ(majority_baseline(coliee), 0.5095);

    std::vector<QAPair> tie{qa("a", {"yes"}, QuestionStyle::Boolean), qa("b", {"no"}, QuestionStyle::Boolean)};
    EXPECT_DOUBLE_EQ(majority_baseline(tie), 0.5);
    tie.push_back(qa("c", {"paris"}));
    EXPECT_THROW(majority_baseline(tie), DataError);
    EXPECT_THROW(majority_baseline(std::vector<QAPair>{}), DataError);
}

namespace {

EvalResult synthetic_result(std::size_t eligible, std::size_t other) {
    EvalResult r;
    r.k = 100;
    for (std::size_t i = 0; i < eligible + other; ++i) {
        QuestionResult q;
        q.question_id = "q" + std::to_string(i);
        q.hit = i < eligible || i % 2 == 0;
        q.f1 = i < eligible ? 0.05 * static_cast<double>(i % 3) : 0.9;
        q.matched_passage_id = q.hit ? "p" + std::to_string(i) : "";
        q.matched_answer = q.hit ? "answer" : "";
        q.prediction = "pred";
        q.gold_answers = {"answer"};
        r.per_question.push_back(q);
    }
    return r;
}

} // namespace

TEST(Audit, SamplerContract) {
    EXPECT_TRUE(audit_false_positives(synthetic_result(0, 30), 50, 0.1, 1).empty());
    const auto r = synthetic_result(200, 50);
    const auto a = audit_false_positives(r, 50, 0.1, 7);
    EXPECT_EQ(a.size(), 50u);
    EXPECT_EQ(a, audit_false_positives(r, 50, 0.1, 7));
    EXPECT_NE(a, audit_false_positives(r, 50, 0.1, 8));
    for (const auto& c : a) {
        EXPECT_LE(c.f1, 0.1);
        EXPECT_FALSE(c.matched_passage_id.empty());
    }
    EXPECT_EQ(audit_false_positives(r, 500, 0.1, 7).size(), 200u);
}

TEST(Audit, ThresholdMonotone) {
    const auto r = synthetic_result(90, 0);
    const auto low = audit_false_positives(r, 1000, 0.02, 3);
    const auto high = audit_false_positives(r, 1000, 0.2, 3);
    EXPECT_EQ(low.size(), 30u);
    EXPECT_EQ(high.size(), 90u);
    for (const auto& c : low) {
        EXPECT_NE(std::find(high.begin(), high.end(), c), high.end());
    }
}

TEST(Audit, OvalOfficeFalsePositive) {
    const Corpus corpus({{"p1", "c", "A tunnel was dug into the White House connecting the Oval Office.", {}}});
    const std::vector<QAPair> qs{qa("q1", {"oval"})};
    const std::vector<RankedList> rl{{"q1", {"p1"}}};
    const std::map<std::string, std::string, std::less<>> preds{{"q1", "Oval Office tunnel"}};
    const auto r = evaluate(rl, corpus, qs, preds, 100);
    ASSERT_TRUE(r.per_question[0].hit);
    const auto cases = audit_false_positives(r, 50, 0.5, 1);
    ASSERT_EQ(cases.size(), 1u);
    EXPECT_EQ(cases[0].matched_passage_id, "p1");
    EXPECT_EQ(cases[0].answer, "oval");
}

TEST(EvalIo, RoundTripAndLoaders) {
    Rng rng(23);
    const auto inst = testkit::random_acc_instance(rng, 10, 10, 4);
    std::map<std::string, std::string, std::less<>> preds;
    for (const auto& q : inst.questions) {
        preds[q.id] = "dow";
    }
    const auto r = evaluate(inst.retrievals, inst.corpus, inst.questions, preds, 4);
    EXPECT_EQ(eval_result_from_json(eval_result_to_json(r, R"({"k":4})")), r);

    TempDir dir;
    const auto rl = load_retrievals(dir.write(
        "r.jsonl", R"({"question_id":"q1","results":[{"passage_id":"p2","score":3.5},{"passage_id":"p1","score":1}]})"
                   "\n"
                   R"({"question_id":"q2","passage_ids":["p9"]})"
                   "\n"));
    ASSERT_EQ(rl.size(), 2u);
    EXPECT_EQ(rl[0].passage_ids, (std::vector<std::string>{"p2", "p1"}));
    EXPECT_EQ(rl[1].passage_ids, std::vector<std::string>{"p9"});
    const auto p = load_predictions(dir.write("p.jsonl", R"({"question_id":"q1","prediction":"x"})"
                                                         "\n"));
    EXPECT_EQ(p.at("q1"), "x");
    EXPECT_THROW(load_predictions(dir.write("d.jsonl", R"({"question_id":"q1","prediction":"x"})"
                                                       "\n"
                                                       R"({"question_id":"q1","prediction":"y"})"
                                                       "\n")),
                 DataError);
}
