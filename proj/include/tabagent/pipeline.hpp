#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabagent/agents.hpp"
#include "tabagent/confidence.hpp"
#include "tabagent/debug_loop.hpp"
#include "tabagent/errors.hpp"
#include "tabagent/llm_gateway.hpp"
#include "tabagent/sandbox.hpp"
#include "tabagent/scheduler.hpp"

namespace tabagent {

struct PipelineConfig {
    bool use_scheduler = true;
    bool use_cc = true;
    bool use_ja = true;
    bool use_fm = true;
    int N = 3;
    double theta = 0.1;
    std::size_t fm_char_limit = 100;

    double pot_threshold = 0.9;
    bool require_equal_results = true;
    bool judge_sees_scores = true;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

struct PipelineResult {
    std::string final_answer;
    RunRecord record;
    std::vector<ReasoningTrace> traces;
    SerializedExample example;
    std::optional<PathScores> path_scores;
};

/// Raised when no path produced an answer. Carries everything gathered so far,
/// with decided_by set to Failed.
class NoCandidates : public PipelineError {
public:
    explicit NoCandidates(PipelineResult partial)
        : PipelineError("no path produced an answer"), partial_(std::move(partial)) {}

    const PipelineResult& partial() const noexcept { return partial_; }

private:
    PipelineResult partial_;
};

/// True when the normalized strings match exactly, or both parse as numbers
/// that agree within 1e-9 relative tolerance.
bool compare_answers(std::string_view a, std::string_view b);

/// Chooses among the non-NOTHING candidates: highest score with the gate's
/// tie-break when scores exist, else the first of PoT, Text2SQL, CoT.
Path fallback_path(const CandidateSet& candidates, const std::optional<ConfidenceVector>& scores);

/// One question end to end. CoT runs on a separate thread alongside the first
/// code path; everything else is sequential. Safe to call concurrently for
/// different questions if the sandbox and backends are.
class Pipeline {
public:
    Pipeline(LlmGateway& gateway, SandboxClient* sandbox, SchedulerBackend& scheduler,
             ConfidenceBackend& checker, PipelineConfig config = {});

    /// Throws NoCandidates when every path is NOTHING.
    PipelineResult answer(const Table& table, const Question& question);

    const PipelineConfig& config() const noexcept { return config_; }

private:
    LlmGateway& gateway_;
    SandboxClient* sandbox_;
    SchedulerBackend& scheduler_;
    ConfidenceBackend& checker_;
    PipelineConfig config_;
};

}  // namespace tabagent
