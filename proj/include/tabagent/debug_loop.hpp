#pragma once

#include <string_view>

#include "tabagent/agents.hpp"
#include "tabagent/sandbox.hpp"
#include "tabagent/similarity.hpp"
#include "tabagent/sql_engine.hpp"
#include "tabagent/types.hpp"

namespace tabagent {

struct LoopConfig {
    int max_debug_rounds = 3;  // N
    double pot_threshold = 0.9;
    bool require_equal_results = true;
};

/// Where generated code runs. The SQL environment is built once per question.
struct ExecutionContext {
    SandboxClient* sandbox = nullptr;
    const SqlEnvironment* sql = nullptr;
};

ExecutionResult execute_pot(SandboxClient* sandbox, const Table& table, std::string_view code);

/// Generation followed by up to N debug rounds. PoT always debugs at least
/// once (when N > 0) and stops on pot_stop; SQL skips debugging when the first
/// query returns a value and otherwise stops on sql_stop. A failed generation
/// is recorded as a single Error iteration; a failed debug call ends the loop.
ReasoningTrace code_and_debug(Path path, Agents& agents, const Table& table, const Question& question,
                              const LoopConfig& config, const ExecutionContext& context);

/// Last answer of a trace: the CoT answer, the PoT value, or the SQL rows
/// flattened row-major and joined with ", ". NOTHING when the last execution
/// did not return a value.
AnswerCandidate trace_candidate(const ReasoningTrace& trace);

}  // namespace tabagent
