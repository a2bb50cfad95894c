#include "tabagent/debug_loop.hpp"

#include <stdexcept>

#include "tabagent/errors.hpp"
#include "tabagent/py_literal.hpp"

namespace tabagent {

ExecutionResult execute_pot(SandboxClient* sandbox, const Table& table, std::string_view code) {
    if (sandbox == nullptr) return ExecutionResult::error("SandboxUnavailable: no sandbox configured");
    return sandbox->execute(table, code);
}

namespace {

ExecutionResult run_code(Path path, const Table& table, const std::string& code,
                         const ExecutionContext& context) {
    if (path == Path::PoT) return execute_pot(context.sandbox, table, code);
    if (context.sql == nullptr) return ExecutionResult::error("Error(runtime): no SQL environment");
    return context.sql->execute(code);
}

}  // namespace

ReasoningTrace code_and_debug(Path path, Agents& agents, const Table& table, const Question& question,
                              const LoopConfig& config, const ExecutionContext& context) {
    if (path == Path::CoT) throw std::invalid_argument("code_and_debug needs a code path");
    const AgentRole debugger = path == Path::PoT ? AgentRole::PDA : AgentRole::SDA;

    ReasoningTrace trace;
    trace.path = path;

    std::string code;
    try {
        code = path == Path::PoT ? agents.run_pot(table, question) : agents.run_t2sql(table, question);
    } catch (const AgentFailed& e) {
        trace.iterations.push_back({"", ExecutionResult::error(std::string("AgentFailed: ") + e.what())});
        return trace;
    }
    trace.iterations.push_back({code, run_code(path, table, code, context)});
    if (path == Path::Text2SQL && trace.iterations.back().result.ok()) return trace;

    const similarity::PotStopOptions stop_options{config.pot_threshold, config.require_equal_results};
    for (int round = 0; round < config.max_debug_rounds; ++round) {
        const Iteration prev = trace.iterations.back();
        try {
            code = agents.run_debug(debugger, table, question, prev.code, prev.result);
        } catch (const AgentFailed&) {
            break;
        }
        trace.iterations.push_back({code, run_code(path, table, code, context)});
        const Iteration& next = trace.iterations.back();
        const bool stop = path == Path::PoT ? similarity::pot_stop(prev, next, context.sandbox, stop_options)
                                            : similarity::sql_stop(prev, next);
        if (stop) break;
    }
    return trace;
}

AnswerCandidate trace_candidate(const ReasoningTrace& trace) {
    if (trace.path == Path::CoT) {
        if (!trace.cot_answer) return AnswerCandidate::nothing(Path::CoT);
        return {Path::CoT, *trace.cot_answer, *trace.cot_answer};
    }
    if (trace.iterations.empty()) return AnswerCandidate::nothing(trace.path);
    const auto& last = trace.iterations.back().result;
    if (!last.ok()) return AnswerCandidate::nothing(trace.path, last.payload);
    if (trace.path == Path::PoT) return {Path::PoT, last.payload, last.payload};

    auto rows = py::parse_rows(last.payload);
    if (!rows) return {Path::Text2SQL, last.payload, last.payload};
    std::string joined;
    bool first = true;
    for (const auto& row : *rows) {
        for (const auto& cell : row) {
            if (!first) joined += ", ";
            joined += py::answer_text(cell);
            first = false;
        }
    }
    return {Path::Text2SQL, joined, last.payload};
}

}  // namespace tabagent
