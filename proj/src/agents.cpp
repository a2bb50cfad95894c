#include "tabagent/agents.hpp"

#include "tabagent/errors.hpp"
#include "tabagent/prompts.hpp"

namespace tabagent {

namespace {

std::string strip(const std::string& s) { return std::string(trim(s)); }

}  // namespace

std::string describe_result(const ExecutionResult& result) {
    if (result.ok()) return result.payload;
    if (result.kind == ExecutionResult::Kind::Timeout) return "Timeout: " + result.payload;
    return result.payload.empty() ? std::string("Error") : result.payload;
}

Agents::Agents(LlmGateway& gateway, AgentOptions options) : gateway_(gateway), options_(options) {}

std::map<std::string, std::string> Agents::ask(AgentRole role, const std::string& prompt,
                                               const std::string& question_id,
                                               const std::vector<std::string>& keys) {
    std::string last_problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string raw;
        try {
            raw = gateway_.complete(role, prompt, question_id);
        } catch (const ProviderFailure& e) {
            throw AgentFailed(e.what());
        }
        try {
            auto fields = extract_json(raw, keys);
            bool blank = false;
            for (const auto& key : keys) blank = blank || trim(fields.at(key)).empty();
            if (!blank) return fields;
            last_problem = "empty value in response";
        } catch (const JsonNotFound& e) {
            last_problem = e.what();
        } catch (const MissingKey& e) {
            last_problem = e.what();
        }
    }
    throw AgentFailed(std::string(to_string(role)) + ": " + last_problem);
}

CotOutput Agents::run_cot(const Table& table, const Question& question) {
    auto fields = ask(AgentRole::CoTA, prompts::cot_prompt(table, question), question.id, {"solution", "answer"});
    return {fields.at("solution"), strip(fields.at("answer"))};
}

std::string Agents::run_pot(const Table& table, const Question& question) {
    auto fields = ask(AgentRole::PoTA, prompts::pot_prompt(table, question), question.id, {"code"});
    return strip(fields.at("code"));
}

std::string Agents::run_t2sql(const Table& table, const Question& question) {
    auto fields = ask(AgentRole::t2SA, prompts::sql_prompt(table, question), question.id, {"code"});
    return strip(fields.at("code"));
}

std::string Agents::run_debug(AgentRole role, const Table& table, const Question& question,
                              const std::string& code, const ExecutionResult& result) {
    if (role != AgentRole::PDA && role != AgentRole::SDA) {
        throw std::invalid_argument("run_debug needs PDA or SDA");
    }
    auto prompt = prompts::debug_prompt(role, table, question, code, describe_result(result));
    auto fields = ask(role, prompt, question.id, {"code"});
    return strip(fields.at("code"));
}

std::string Agents::run_judge(const Table& table, const Question& question,
                              const std::vector<ReasoningTrace>& traces, const CandidateSet& candidates,
                              const std::optional<ConfidenceVector>& scores) {
    if (candidates.all_nothing()) throw PipelineError("judge called with no candidate answers");

    std::vector<prompts::JudgeEvidence> evidence;
    for (Path path : {Path::CoT, Path::PoT, Path::Text2SQL}) {
        prompts::JudgeEvidence e;
        e.path = path;
        for (const auto& trace : traces) {
            if (trace.path != path) continue;
            e.iterations = trace.iterations;
            if (trace.solution_text) e.solution = *trace.solution_text;
        }
        const auto& candidate = candidates.at(path);
        e.answer = candidate.value ? *candidate.value : std::string(kNothingToken);
        evidence.push_back(std::move(e));
    }
    const auto shown = options_.judge_sees_scores ? scores : std::nullopt;
    auto fields = ask(AgentRole::JA, prompts::judge_prompt(table, question, evidence, shown), question.id,
                      {"answer"});
    return strip(fields.at("answer"));
}

std::string Agents::run_format_matcher(const Question& question, const std::string& long_answer) {
    try {
        auto fields = ask(AgentRole::FM, prompts::format_matcher_prompt(question, long_answer), question.id,
                          {"Extracted_Answer"});
        return strip(fields.at("Extracted_Answer"));
    } catch (const AgentFailed&) {
        return long_answer;
    }
}

}  // namespace tabagent
