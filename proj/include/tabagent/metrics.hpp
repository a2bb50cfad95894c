#pragma once

#include <string>
#include <string_view>

#include "tabagent/types.hpp"

namespace tabagent::metrics {

/// Lower-cases and strips outer whitespace. Internal whitespace and
/// punctuation are kept.
std::string normalize_answer(std::string_view text);

int exact_match(std::string_view pred, std::string_view gold);

/// Sequence-matcher ratio of the normalized strings, rounded to an integer
/// percentage (half-to-even) and divided by 100.
double fuzzy_ratio(std::string_view pred, std::string_view gold);

/// SQuAD-style F1 over whitespace tokens of the normalized strings, using
/// multiset overlap.
double token_f1(std::string_view pred, std::string_view gold);

MetricTriple evaluate(std::string_view pred, std::string_view gold);

}  // namespace tabagent::metrics
