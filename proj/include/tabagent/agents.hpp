#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabagent/llm_gateway.hpp"
#include "tabagent/table.hpp"
#include "tabagent/types.hpp"

namespace tabagent {

struct CotOutput {
    std::string solution;
    std::string answer;
};

struct AgentOptions {
    bool judge_sees_scores = true;
};

/// Prompt construction and response parsing for every agent role. Each call
/// makes one gateway request, plus one identical re-ask when the reply has no
/// usable JSON. Provider failures and a second bad reply raise AgentFailed.
class Agents {
public:
    explicit Agents(LlmGateway& gateway, AgentOptions options = {});

    CotOutput run_cot(const Table& table, const Question& question);
    std::string run_pot(const Table& table, const Question& question);
    std::string run_t2sql(const Table& table, const Question& question);

    /// role must be PDA or SDA.
    std::string run_debug(AgentRole role, const Table& table, const Question& question,
                          const std::string& code, const ExecutionResult& result);

    /// Throws PipelineError when every candidate is NOTHING.
    std::string run_judge(const Table& table, const Question& question,
                          const std::vector<ReasoningTrace>& traces, const CandidateSet& candidates,
                          const std::optional<ConfidenceVector>& scores);

    /// Returns long_answer unchanged if the extraction fails.
    std::string run_format_matcher(const Question& question, const std::string& long_answer);

    LlmGateway& gateway() noexcept { return gateway_; }

private:
    std::map<std::string, std::string> ask(AgentRole role, const std::string& prompt,
                                           const std::string& question_id,
                                           const std::vector<std::string>& keys);

    LlmGateway& gateway_;
    AgentOptions options_;
};

/// Text shown for an execution result inside prompts.
std::string describe_result(const ExecutionResult& result);

}  // namespace tabagent
