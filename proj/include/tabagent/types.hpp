#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabagent {

enum class Path { CoT, PoT, Text2SQL };

enum class AgentRole { CoTA, PoTA, t2SA, PDA, SDA, JA, FM };

inline constexpr std::array<AgentRole, 7> kAllRoles = {AgentRole::CoTA, AgentRole::PoTA,
                                                       AgentRole::t2SA, AgentRole::PDA,
                                                       AgentRole::SDA,  AgentRole::JA,
                                                       AgentRole::FM};

std::string_view to_string(Path path);
std::string_view to_string(AgentRole role);
std::optional<AgentRole> parse_role(std::string_view name);
std::optional<Path> parse_path(std::string_view name);

struct ExecutionResult {
    enum class Kind { Value, Error, Timeout };

    Kind kind = Kind::Error;
    std::string payload;

    static ExecutionResult value(std::string v) { return {Kind::Value, std::move(v)}; }
    static ExecutionResult error(std::string msg) { return {Kind::Error, std::move(msg)}; }
    static ExecutionResult timeout(std::string msg = "Timeout") {
        return {Kind::Timeout, std::move(msg)};
    }

    bool ok() const noexcept { return kind == Kind::Value; }
    friend bool operator==(const ExecutionResult&, const ExecutionResult&) = default;
};

std::string_view to_string(ExecutionResult::Kind kind);

struct Iteration {
    std::string code;
    ExecutionResult result;

    friend bool operator==(const Iteration&, const Iteration&) = default;
};

/// Per-path record of what the agents produced. Code paths hold one entry per
/// generation/debug round; the CoT path holds no iterations and a solution text.
struct ReasoningTrace {
    Path path = Path::PoT;
    std::vector<Iteration> iterations;
    std::optional<std::string> solution_text;
    /// CoT only: the answer the agent reported alongside its solution.
    std::optional<std::string> cot_answer;

    std::size_t debug_rounds() const noexcept {
        return iterations.empty() ? 0 : iterations.size() - 1;
    }
};

inline constexpr std::string_view kNothingToken = "<NOTHING>";

struct AnswerCandidate {
    Path path = Path::CoT;
    std::optional<std::string> value;  // nullopt is the NOTHING marker
    std::string raw;

    bool is_nothing() const noexcept { return !value.has_value(); }

    static AnswerCandidate nothing(Path p, std::string raw = {}) {
        return {p, std::nullopt, std::move(raw)};
    }
};

/// Candidates indexed CoT, PoT, Text2SQL.
struct CandidateSet {
    AnswerCandidate cot{Path::CoT, std::nullopt, {}};
    AnswerCandidate pot{Path::PoT, std::nullopt, {}};
    AnswerCandidate sql{Path::Text2SQL, std::nullopt, {}};
    std::optional<Path> skipped;

    const AnswerCandidate& at(Path p) const;
    AnswerCandidate& at(Path p);
    bool all_nothing() const { return cot.is_nothing() && pot.is_nothing() && sql.is_nothing(); }
};

/// Checker scores for the three candidates, each in [0, 1].
struct ConfidenceVector {
    double cot = 0.0;
    double pot = 0.0;
    double sql = 0.0;

    double at(Path p) const noexcept {
        return p == Path::CoT ? cot : p == Path::PoT ? pot : sql;
    }
    double& at(Path p) noexcept { return p == Path::CoT ? cot : p == Path::PoT ? pot : sql; }
    std::array<double, 3> as_array() const noexcept { return {cot, pot, sql}; }
};

struct MetricTriple {
    int em = 0;
    double fuzzy = 0.0;
    double f1 = 0.0;
};

enum class Routing { PoTFirst, SQLFirst, NoScheduler };

// Fallback covers answers picked by score argmax / path priority when the judge
// is disabled or failed; Failed marks questions where no path produced anything.
enum class DecidedBy { ConfidenceGate, JudgeAgent, Fallback, Failed };

std::string_view to_string(Routing routing);
std::string_view to_string(DecidedBy decided);

struct RunRecord {
    std::string question_id;
    Routing routing = Routing::NoScheduler;
    std::optional<Path> skipped_path;
    std::map<AgentRole, int> call_counts;
    DecidedBy decided_by = DecidedBy::ConfidenceGate;
    std::string final_answer;
    std::string gold;
    MetricTriple metrics;
    std::optional<std::array<double, 3>> scores;  // cot, pot, sql when the checker ran
    bool format_matched = false;
    std::string error;

    int calls(AgentRole role) const {
        auto it = call_counts.find(role);
        return it == call_counts.end() ? 0 : it->second;
    }
    int total_calls() const {
        int total = 0;
        for (const auto& [_, n] : call_counts) total += n;
        return total;
    }
};

}  // namespace tabagent
