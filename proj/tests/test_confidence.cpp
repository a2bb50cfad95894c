#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"
#include "tabagent/confidence.hpp"
#include "tabagent/debug_loop.hpp"
#include "tabagent/errors.hpp"

using namespace tabagent;

namespace {

struct CookiesRun {
    ReasoningTrace cot{Path::CoT, {}, std::string("27 - 23 = 4, a decrease."), std::string("-4")};
    ReasoningTrace pot{Path::PoT,
                       {{"ans = df.loc[2, 'Boxes'] - df.loc[1, 'Boxes']", ExecutionResult::error("KeyError: 'Boxes'")},
                        {"ans = 23 - 27", ExecutionResult::value("-4")}},
                       std::nullopt,
                       std::nullopt};
    ReasoningTrace sql{Path::Text2SQL, {{"SELECT 23 - 27", ExecutionResult::value("[[-4]]")}}, std::nullopt, std::nullopt};

    CandidateSet candidates() const {
        CandidateSet c;
        c.cot = trace_candidate(cot);
        c.pot = trace_candidate(pot);
        c.sql = trace_candidate(sql);
        return c;
    }
};

SerializedExample with_candidates(std::string cot, std::string pot, std::string sql) {
    SerializedExample ex;
    auto set = [](AnswerCandidate& c, std::string v) {
        if (v != "-") c.value = std::move(v);
    };
    set(ex.candidates.cot, std::move(cot));
    set(ex.candidates.pot, std::move(pot));
    set(ex.candidates.sql, std::move(sql));
    return ex;
}

}  // namespace

TEST(Serialize, CookiesLayout) {
    CookiesRun run;
    auto ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.pot, run.sql},
                                run.candidates());
    const std::string expected =
        "<Table_row_size>5</Table_row_size>\n"
        "<Table_column_size>2</Table_column_size>\n"
        "<Table_size>10</Table_size>\n"
        "<Table>\n"
        "| Day | Boxes of cookies |\n"
        "|:---|:---|\n"
        "| Tuesday | 25 |\n"
        "| Wednesday | 27 |\n"
        "| Thursday | 23 |\n"
        "| Friday | 26 |\n"
        "| Saturday | 23 |\n"
        "</Table>\n"
        "<Question>" + fixtures::cookies_question().text + "</Question>\n"
        "<PoT>\n"
        "<N=0_code>ans = df.loc[2, 'Boxes'] - df.loc[1, 'Boxes']</N=0_code>\n"
        "<N=0_execution_result>KeyError: 'Boxes'</N=0_execution_result>\n"
        "<N=1_code>ans = 23 - 27</N=1_code>\n"
        "<N=1_execution_result>-4</N=1_execution_result>\n"
        "</PoT>\n"
        "<text2sql>\n"
        "<N=0_code>SELECT 23 - 27</N=0_code>\n"
        "<N=0_execution_result>[[-4]]</N=0_execution_result>\n"
        "</text2sql>\n"
        "<CoT>\n"
        "<solution>27 - 23 = 4, a decrease.</solution>\n"
        "<answer>-4</answer>\n"
        "</CoT>";
    EXPECT_EQ(ex.text, expected);
    EXPECT_EQ(ex.nothing, (std::array<bool, 3>{false, false, false}));
    EXPECT_FALSE(ex.table_truncated);
}

TEST(Serialize, SkippedPathIsNothingEverywhere) {
    CookiesRun run;
    auto c = run.candidates();
    c.skipped = Path::PoT;
    auto ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.sql}, c);
    EXPECT_NE(ex.text.find("<PoT>\n<N=0_code><NOTHING></N=0_code>\n<N=0_execution_result><NOTHING></N=0_execution_result>\n</PoT>"),
              std::string::npos);
    EXPECT_TRUE(ex.is_nothing(Path::PoT));
    EXPECT_TRUE(ex.candidates.pot.is_nothing());
    EXPECT_FALSE(ex.candidates.sql.is_nothing());
}

TEST(Serialize, OverlongBodyBecomesNothing) {
    CookiesRun run;
    // Body length is the two tagged lines; pick code sizes either side of the limit.
    const std::string fixed = "<N=0_code></N=0_code>\n<N=0_execution_result>-4</N=0_execution_result>\n";
    for (std::size_t body : {kMaxPathBody, kMaxPathBody + 1}) {
        run.pot.iterations = {{std::string(body - fixed.size(), 'x'), ExecutionResult::value("-4")}};
        auto ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.pot, run.sql},
                                    run.candidates());
        EXPECT_EQ(ex.is_nothing(Path::PoT), body > kMaxPathBody) << body;
        EXPECT_EQ(ex.candidates.pot.is_nothing(), body > kMaxPathBody) << body;
    }
}

TEST(Serialize, FailedCotAndTruncatedTable) {
    CookiesRun run;
    run.cot.solution_text.reset();
    run.cot.cot_answer.reset();
    auto ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.pot, run.sql},
                                run.candidates(), SerializeOptions{2});
    EXPECT_NE(ex.text.find("<CoT>\n<solution><NOTHING></solution>\n<answer><NOTHING></answer>\n</CoT>"),
              std::string::npos);
    EXPECT_TRUE(ex.is_nothing(Path::CoT));
    EXPECT_TRUE(ex.table_truncated);
    EXPECT_NE(ex.text.find("<Table_row_size>5</Table_row_size>"), std::string::npos);
    EXPECT_EQ(ex.text.find("| Thursday |"), std::string::npos);
}

TEST(ParseCandidates, RoundTripsSerializedText) {
    CookiesRun run;
    auto c = run.candidates();
    auto ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.pot, run.sql}, c);
    auto parsed = parse_candidates(ex.text);
    EXPECT_EQ(parsed.cot.value, c.cot.value);
    EXPECT_EQ(parsed.pot.value, c.pot.value);
    EXPECT_EQ(parsed.sql.value, "-4");

    c.skipped = Path::Text2SQL;
    run.pot.iterations.push_back({"ans = boom", ExecutionResult::timeout()});
    c.pot = trace_candidate(run.pot);
    ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.pot}, c);
    parsed = parse_candidates(ex.text);
    EXPECT_TRUE(parsed.pot.is_nothing());
    EXPECT_TRUE(parsed.sql.is_nothing());
    EXPECT_EQ(parsed.cot.value, "-4");

    for (const char* failed : {"Timeout", "KeyError: 'Boxes'", "Error(syntax): near FROM", "Rejected: x",
                               "AgentFailed: provider down", "pandas.errors.ParserError: bad", "ZeroDivisionError", "Error"}) {
        run.pot.iterations.back().result = ExecutionResult::value(failed);
        c.pot = trace_candidate(run.pot);
        ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.pot}, c);
        EXPECT_TRUE(parse_candidates(ex.text).pot.is_nothing()) << failed;
    }
    for (const char* value : {"84", "Errors: 3", "Terror"}) {
        run.pot.iterations.back().result = ExecutionResult::value(value);
        c.pot = trace_candidate(run.pot);
        ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.pot}, c);
        EXPECT_EQ(parse_candidates(ex.text).pot.value, value);
    }
}

TEST(AgreementBackend, Scores) {
    AgreementBackend a;
    auto v = a.score(with_candidates("-4", "-4", "-4"), "q");
    EXPECT_DOUBLE_EQ(v.cot, 1.0);
    EXPECT_DOUBLE_EQ(v.pot, 1.0);
    v = a.score(with_candidates("3", "4", "5"), "q");
    EXPECT_DOUBLE_EQ(v.pot, 0.0);
    EXPECT_DOUBLE_EQ(v.cot, 0.0);
    v = a.score(with_candidates("-4", "-4", "5"), "q");
    EXPECT_DOUBLE_EQ(v.cot, 0.45);
    EXPECT_DOUBLE_EQ(v.pot, 0.5);
    EXPECT_DOUBLE_EQ(v.sql, 0.0);
    v = a.score(with_candidates("-", "7", "-"), "q");
    EXPECT_DOUBLE_EQ(v.pot, AgreementBackend::kLoneScore);
    EXPECT_DOUBLE_EQ(v.cot, 0.0);
}

TEST(ScoreFunction, ClampsZeroesNothingAndFallsBack) {
    auto ex = with_candidates("a", "-", "a");
    StubBackend stub({1.5, 0.9, -0.2});
    auto v = score(ex, "q", stub);
    EXPECT_EQ(v.cot, 1.0);
    EXPECT_EQ(v.pot, 0.0);
    EXPECT_EQ(v.sql, 0.0);

    struct Down : ConfidenceBackend {
        std::string_view name() const override { return "down"; }
        ConfidenceVector score(const SerializedExample&, const std::string&) override {
            throw ScorerUnavailable("down");
        }
    } down;
    bool fell_back = false;
    v = score(ex, "q", down, &fell_back);
    EXPECT_TRUE(fell_back);
    EXPECT_DOUBLE_EQ(v.cot, 1.0);
    EXPECT_DOUBLE_EQ(v.sql, 1.0);
}

TEST(StubBackend, FromJson) {
    auto stub = StubBackend::from_json(
        nlohmann::json::parse(R"({"default": [0.1, 0.2, 0.3], "by_question": {"q7": [0.7, 0, 0]}})"));
    EXPECT_DOUBLE_EQ(stub.score({}, "q1").sql, 0.3);
    EXPECT_DOUBLE_EQ(stub.score({}, "q7").cot, 0.7);
    EXPECT_THROW(StubBackend::from_json(nlohmann::json::parse(R"({"default": [1, 2]})")), ConfigError);
    EXPECT_THROW(StubBackend::from_file("/nonexistent.json"), ConfigError);
}

TEST(Gate, StrictThresholdAndTieOrder) {
    EXPECT_EQ(gate({0.2, 0.2, 0.2}, 0.1), Path::PoT);
    EXPECT_EQ(gate({0.3, 0.2, 0.3}, 0.1), Path::Text2SQL);
    EXPECT_EQ(gate({0.3, 0.2, 0.1}, 0.1), Path::CoT);
    EXPECT_EQ(gate({0.1, 0.1, 0.1}, 0.1), std::nullopt);
    EXPECT_EQ(gate({0.0, 0.0, 0.0}, 0.0), std::nullopt);
    EXPECT_EQ(gate({0.0, 0.0, 1e-9}, 0.0), Path::Text2SQL);
    EXPECT_EQ(argmax_path({0, 0, 0}), Path::PoT);
}

TEST(Gate, MatchesBruteForceOnRandomVectors) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> d(0, 4);
    for (int i = 0; i < 2000; ++i) {
        ConfidenceVector v{d(rng) / 4.0, d(rng) / 4.0, d(rng) / 4.0};
        const double theta = d(rng) / 4.0;
        const double best = std::max({v.cot, v.pot, v.sql});
        std::optional<Path> expected;
        if (best > theta) {
            for (Path p : kTieBreakOrder) {
                if (v.at(p) == best) {
                    expected = p;
                    break;
                }
            }
        }
        EXPECT_EQ(gate(v, theta), expected);
    }
}

TEST(SoftLabel, ExactMatchOrTokenF1) {
    EXPECT_EQ(soft_label(" Answer ", "answer"), 1.0);
    EXPECT_DOUBLE_EQ(soft_label("1 2 3", "1 2"), 0.8);
    EXPECT_EQ(soft_label("x", "y"), 0.0);
    // Same token multiset without an exact match still scores a full F1.
    EXPECT_EQ(soft_label("b a", "a b"), 1.0);
    EXPECT_EQ(soft_label("a  b", "a b"), 1.0);
    std::mt19937 rng(3);
    const std::vector<std::string> words = {"a", "the", "42", "Paris", "paris.", "x", "7"};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(0, 4);
    for (int i = 0; i < 500; ++i) {
        std::string p, g;
        for (auto n = len(rng); n; --n) p += words[pick(rng)] + " ";
        for (auto n = len(rng); n; --n) g += words[pick(rng)] + " ";
        EXPECT_DOUBLE_EQ(soft_label(p, g), oracle::soft_label(p, g)) << p << "|" << g;
    }
}

TEST(CcTraining, TsvRows) {
    CookiesRun run;
    auto c = run.candidates();
    c.skipped = Path::PoT;
    auto ex = serialize_example(fixtures::cookies(), fixtures::cookies_question(), {run.cot, run.sql}, c,
                                SerializeOptions{100});
    std::ostringstream out;
    emit_cc_training_rows(out, {{"cookies", ex, "-4"}});
    std::istringstream in(out.str());
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_FALSE(std::getline(in, extra));
    EXPECT_EQ(header, "question_id\ttext\tcot_label\tpot_label\tsql_label\ttable_truncated");
    EXPECT_EQ(row.rfind("cookies\t<Table_row_size>5</Table_row_size>\\n", 0), 0u);
    EXPECT_TRUE(row.ends_with("\t1.000000\t0.000000\t1.000000\t0"));
}
