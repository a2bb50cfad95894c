#include "tabagent/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "tabagent/sequence_matcher.hpp"
#include "tabagent/table.hpp"

namespace tabagent::metrics {

std::string normalize_answer(std::string_view text) {
    return to_lower(trim(text));
}

int exact_match(std::string_view pred, std::string_view gold) {
    return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

double fuzzy_ratio(std::string_view pred, std::string_view gold) {
    const std::string a = normalize_answer(pred);
    const std::string b = normalize_answer(gold);
    if (a == b) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    // std::nearbyint rounds half-to-even under the default rounding mode.
    const double percent = std::nearbyint(100.0 * sequence_ratio(a, b));
    return percent / 100.0;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

}  // namespace

double token_f1(std::string_view pred, std::string_view gold) {
    const auto pred_tokens = whitespace_tokens(normalize_answer(pred));
    const auto gold_tokens = whitespace_tokens(normalize_answer(gold));
    if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;

    std::map<std::string, int> gold_counts;
    for (const auto& t : gold_tokens) ++gold_counts[t];
    int same = 0;
    for (const auto& t : pred_tokens) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++same;
        }
    }
    if (same == 0) return 0.0;
    const double precision = static_cast<double>(same) / static_cast<double>(pred_tokens.size());
    const double recall = static_cast<double>(same) / static_cast<double>(gold_tokens.size());
    return 2.0 * precision * recall / (precision + recall);
}

MetricTriple evaluate(std::string_view pred, std::string_view gold) {
    return {exact_match(pred, gold), fuzzy_ratio(pred, gold), token_f1(pred, gold)};
}

}  // namespace tabagent::metrics
