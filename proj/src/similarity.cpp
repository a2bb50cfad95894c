#include "tabagent/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>
#include <vector>

#include "tabagent/errors.hpp"
#include "tabagent/sequence_matcher.hpp"

namespace tabagent::similarity {

double levenshtein_ratio(std::string_view a, std::string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> curr(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitute});
        }
        std::swap(prev, curr);
    }
    return 1.0 - static_cast<double>(prev[b.size()]) / static_cast<double>(longest);
}

double sequence_match_ratio(std::string_view a, std::string_view b) {
    return sequence_ratio(a, b);
}

SimilarityReport code_similarity(std::string_view a, std::string_view b, SandboxClient* sandbox) {
    SimilarityReport report;
    report.levenshtein = levenshtein_ratio(a, b);
    report.sequence_match = sequence_match_ratio(a, b);
    if (sandbox != nullptr) {
        try {
            auto sim = sandbox->similarity(a, b);
            report.ast = sim.ast;
            report.opcode = sim.opcode;
        } catch (const SandboxUnavailable&) {
            report.sandbox_degraded = true;
        }
    } else {
        report.sandbox_degraded = true;
    }
    double sum = report.levenshtein + report.sequence_match;
    int count = 2;
    for (const auto& component : {report.ast, report.opcode}) {
        if (component) {
            sum += *component;
            ++count;
        }
    }
    report.mean = sum / count;
    return report;
}

bool pot_stop(const Iteration& prev, const Iteration& next, SandboxClient* sandbox,
              const PotStopOptions& options, SimilarityReport* report) {
    auto sim = code_similarity(prev.code, next.code, sandbox);
    if (report != nullptr) *report = sim;
    if (!(sim.mean > options.threshold)) return false;
    return !options.require_equal_results || prev.result == next.result;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

bool sql_stop(const Iteration& prev, const Iteration& next) {
    if (normalize_whitespace(prev.code) == normalize_whitespace(next.code)) return true;
    // Timeouts count as errors here.
    return !prev.result.ok() && next.result.ok();
}

}  // namespace tabagent::similarity
