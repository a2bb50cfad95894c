#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tabagent/confidence.hpp"
#include "tabagent/metrics.hpp"
#include "tabagent/sequence_matcher.hpp"
#include "tabagent/similarity.hpp"

using namespace tabagent;

TEST(Metrics, WorkedExampleAnchors) {
    EXPECT_DOUBLE_EQ(metrics::fuzzy_ratio("John , Andy", "John and Andy"), 0.83);
    EXPECT_NEAR(similarity::sequence_match_ratio("John , Andy", "John and Andy"), 0.8333, 1e-4);
    EXPECT_NEAR(metrics::token_f1("John , Andy", "John and Andy"), 2.0 / 3.0, 1e-9);
    EXPECT_EQ(metrics::exact_match("John , Andy", "John and Andy"), 0);
}

TEST(Metrics, ExactMatchNormalizesCaseAndOuterSpace) {
    EXPECT_EQ(metrics::exact_match("  Gwen ", "gwen"), 1);
    EXPECT_EQ(metrics::exact_match("Gwen.", "Gwen"), 0);
    EXPECT_EQ(metrics::exact_match("a  b", "a b"), 0);
    EXPECT_EQ(metrics::normalize_answer("\tHello World \n"), "hello world");
}

TEST(Metrics, EmptyInputs) {
    EXPECT_DOUBLE_EQ(metrics::fuzzy_ratio("", ""), 1.0);
    EXPECT_DOUBLE_EQ(metrics::fuzzy_ratio("abc", ""), 0.0);
    EXPECT_DOUBLE_EQ(metrics::token_f1("", ""), 1.0);
    EXPECT_DOUBLE_EQ(metrics::token_f1("x", "  "), 0.0);
}

TEST(Metrics, TokenF1UsesMultisetOverlap) {
    EXPECT_NEAR(metrics::token_f1("a a b", "a b b"), 2.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(metrics::token_f1("x y", "y x"), 1.0);
    EXPECT_DOUBLE_EQ(metrics::token_f1("x", "y"), 0.0);
}

// Values from difflib.SequenceMatcher(None, a, b, autojunk=False).ratio().
TEST(SequenceMatcher, MatchesDifflib) {
    struct Case {
        const char* a;
        const char* b;
        double ratio;
    };
    const Case cases[] = {
        {"abcd", "bcde", 0.75},
        {"the quick brown fox", "quick brown the fox", 0.7894736842105263},
        {"84", "84.0", 0.6666666666666666},
        {"Gwen", "Gwendolyn", 0.6153846153846154},
        {"aaaa", "aa", 0.6666666666666666},
        {"private", "privet", 0.7692307692307693},
        {"12,000", "12000", 0.9090909090909091},
    };
    for (const auto& c : cases) EXPECT_DOUBLE_EQ(sequence_ratio(c.a, c.b), c.ratio) << c.a << " / " << c.b;
    EXPECT_DOUBLE_EQ(sequence_ratio("", ""), 1.0);
    EXPECT_EQ(matching_characters("abxcd", "abcd"), 4u);
}

TEST(Metrics, FuzzyRoundsHalfToEven) {
    // 2M/T = 1/8 -> 12.5% -> 12; 3/8 -> 37.5% -> 38.
    EXPECT_DOUBLE_EQ(metrics::fuzzy_ratio("abcdefgh", "axxxxxxx"), 0.12);
    EXPECT_DOUBLE_EQ(metrics::fuzzy_ratio("abcdefgh", "abcxxxxx"), 0.38);
}

namespace {

std::string random_answer(std::mt19937& rng) {
    static const std::vector<std::string> words = {"john", "andy", "and", "84", "84.0", "Gwen", "the",
                                                   ",",    "-4",   "4",   "red", "blue", "A",    "a"};
    std::uniform_int_distribution<int> n_words(0, 5), pick(0, static_cast<int>(words.size()) - 1), ws(0, 3);
    std::string out;
    const int n = n_words(rng);
    for (int i = 0; i < n; ++i) {
        out += std::string(ws(rng) == 0 ? 2 : 1, ' ');
        out += words[pick(rng)];
    }
    return out;
}

}  // namespace

TEST(MetricsProperty, AgreesWithOracles) {
    std::mt19937 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_answer(rng);
        const auto b = random_answer(rng);
        ASSERT_NEAR(metrics::token_f1(a, b), oracle::token_f1(a, b), 1e-9) << a << " | " << b;
        ASSERT_DOUBLE_EQ(metrics::fuzzy_ratio(a, b), oracle::fuzzy(a, b)) << a << " | " << b;
        ASSERT_EQ(metrics::exact_match(a, b), oracle::em(a, b));
        ASSERT_DOUBLE_EQ(soft_label(a, b), oracle::soft_label(a, b));
    }
}

TEST(MetricsProperty, SymmetryAndBounds) {
    std::mt19937 rng(11);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_answer(rng);
        const auto b = random_answer(rng);
        const auto m = metrics::evaluate(a, b);
        EXPECT_GE(m.fuzzy, 0.0);
        EXPECT_LE(m.fuzzy, 1.0);
        EXPECT_GE(m.f1, 0.0);
        EXPECT_LE(m.f1, 1.0);
        EXPECT_NEAR(m.f1, metrics::token_f1(b, a), 1e-12);
        if (m.em) {
            EXPECT_DOUBLE_EQ(m.fuzzy, 1.0);
            EXPECT_DOUBLE_EQ(m.f1, 1.0);
        }
    }
}
