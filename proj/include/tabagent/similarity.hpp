#pragma once

#include <optional>
#include <string_view>

#include "tabagent/sandbox.hpp"
#include "tabagent/types.hpp"

namespace tabagent::similarity {

/// 1 - edit_distance / max(|a|, |b|); 1.0 when both are empty.
double levenshtein_ratio(std::string_view a, std::string_view b);

/// Unrounded Ratcliff-Obershelp ratio 2M / (|a| + |b|).
double sequence_match_ratio(std::string_view a, std::string_view b);

struct SimilarityReport {
    double levenshtein = 0.0;
    double sequence_match = 0.0;
    std::optional<double> ast;
    std::optional<double> opcode;
    double mean = 0.0;
    bool sandbox_degraded = false;  // sandbox could not be reached
};

/// Computes all available components and their arithmetic mean. AST/opcode
/// come from the sandbox; a null sandbox or SandboxUnavailable drops them.
SimilarityReport code_similarity(std::string_view a, std::string_view b, SandboxClient* sandbox);

struct PotStopOptions {
    double threshold = 0.9;
    bool require_equal_results = true;
};

/// True when the mean similarity of the two code versions strictly exceeds
/// the threshold and (unless relaxed) both executions produced the same result.
bool pot_stop(const Iteration& prev, const Iteration& next, SandboxClient* sandbox,
              const PotStopOptions& options = {}, SimilarityReport* report = nullptr);

/// True when the whitespace-normalized queries are identical, or when a
/// failing query now returns a value.
bool sql_stop(const Iteration& prev, const Iteration& next);

std::string normalize_whitespace(std::string_view text);

}  // namespace tabagent::similarity
