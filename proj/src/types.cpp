#include "tabagent/types.hpp"

namespace tabagent {

std::string_view to_string(Path path) {
    switch (path) {
        case Path::CoT: return "CoT";
        case Path::PoT: return "PoT";
        case Path::Text2SQL: return "Text2SQL";
    }
    return "?";
}

std::string_view to_string(AgentRole role) {
    switch (role) {
        case AgentRole::CoTA: return "CoTA";
        case AgentRole::PoTA: return "PoTA";
        case AgentRole::t2SA: return "t2SA";
        case AgentRole::PDA: return "PDA";
        case AgentRole::SDA: return "SDA";
        case AgentRole::JA: return "JA";
        case AgentRole::FM: return "FM";
    }
    return "?";
}

std::optional<AgentRole> parse_role(std::string_view name) {
    for (auto role : kAllRoles) {
        if (to_string(role) == name) return role;
    }
    return std::nullopt;
}

std::optional<Path> parse_path(std::string_view name) {
    for (auto p : {Path::CoT, Path::PoT, Path::Text2SQL}) {
        if (to_string(p) == name) return p;
    }
    return std::nullopt;
}

std::string_view to_string(ExecutionResult::Kind kind) {
    switch (kind) {
        case ExecutionResult::Kind::Value: return "value";
        case ExecutionResult::Kind::Error: return "error";
        case ExecutionResult::Kind::Timeout: return "timeout";
    }
    return "?";
}

std::string_view to_string(Routing routing) {
    switch (routing) {
        case Routing::PoTFirst: return "PoTFirst";
        case Routing::SQLFirst: return "SQLFirst";
        case Routing::NoScheduler: return "NoScheduler";
    }
    return "?";
}

std::string_view to_string(DecidedBy decided) {
    switch (decided) {
        case DecidedBy::ConfidenceGate: return "ConfidenceGate";
        case DecidedBy::JudgeAgent: return "JudgeAgent";
        case DecidedBy::Fallback: return "Fallback";
        case DecidedBy::Failed: return "Failed";
    }
    return "?";
}

const AnswerCandidate& CandidateSet::at(Path p) const {
    switch (p) {
        case Path::CoT: return cot;
        case Path::PoT: return pot;
        case Path::Text2SQL: return sql;
    }
    return cot;
}

AnswerCandidate& CandidateSet::at(Path p) {
    return const_cast<AnswerCandidate&>(static_cast<const CandidateSet&>(*this).at(p));
}

}  // namespace tabagent
