#include "tabagent/pipeline.hpp"

#include <cmath>
#include <future>

#include "tabagent/column_types.hpp"
#include "tabagent/metrics.hpp"
#include "tabagent/sql_engine.hpp"

namespace tabagent {

namespace {

std::optional<double> as_number(std::string_view s) {
    auto text = numeric_text(trim(s));
    if (!text) return std::nullopt;
    try {
        return std::stod(*text);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

void PipelineConfig::validate() const {
    if (N < 0) throw ConfigError("N must be >= 0");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must be in [0, 1]");
    if (!(pot_threshold >= 0.0 && pot_threshold <= 1.0)) throw ConfigError("pot threshold must be in [0, 1]");
}

bool compare_answers(std::string_view a, std::string_view b) {
    if (metrics::exact_match(a, b)) return true;
    auto x = as_number(a);
    auto y = as_number(b);
    if (!x || !y) return false;
    if (*x == *y) return true;
    return std::fabs(*x - *y) <= 1e-9 * std::max(std::fabs(*x), std::fabs(*y));
}

Path fallback_path(const CandidateSet& candidates, const std::optional<ConfidenceVector>& scores) {
    std::optional<Path> best;
    for (Path p : kTieBreakOrder) {
        if (candidates.at(p).is_nothing()) continue;
        if (!best || (scores && scores->at(p) > scores->at(*best))) best = p;
    }
    if (!best) throw PipelineError("no candidate to fall back on");
    return *best;
}

Pipeline::Pipeline(LlmGateway& gateway, SandboxClient* sandbox, SchedulerBackend& scheduler,
                   ConfidenceBackend& checker, PipelineConfig config)
    : gateway_(gateway), sandbox_(sandbox), scheduler_(scheduler), checker_(checker), config_(config) {
    config_.validate();
}

PipelineResult Pipeline::answer(const Table& table, const Question& question) {
    Agents agents(gateway_, AgentOptions{config_.judge_sees_scores});
    const SqlEnvironment sql(table);
    const ExecutionContext context{sandbox_, &sql};
    const LoopConfig loop{config_.N, config_.pot_threshold, config_.require_equal_results};

    PipelineResult out;
    RunRecord& record = out.record;
    record.question_id = question.id;

    auto cot_future = std::async(std::launch::async, [&]() -> ReasoningTrace {
        ReasoningTrace trace;
        trace.path = Path::CoT;
        try {
            auto cot = agents.run_cot(table, question);
            trace.solution_text = std::move(cot.solution);
            trace.cot_answer = std::move(cot.answer);
        } catch (const AgentFailed&) {
        }
        return trace;
    });

    Path first = Path::PoT;
    if (config_.use_scheduler) {
        const auto features = extract_features(table, question);
        out.path_scores = score_paths(features, question, schema_text(table), scheduler_);
        first = out.path_scores->prob_pot >= out.path_scores->prob_sql ? Path::PoT : Path::Text2SQL;
        record.routing = first == Path::PoT ? Routing::PoTFirst : Routing::SQLFirst;
    } else {
        record.routing = Routing::NoScheduler;
    }
    const Path second = first == Path::PoT ? Path::Text2SQL : Path::PoT;

    ReasoningTrace first_trace;
    try {
        first_trace = code_and_debug(first, agents, table, question, loop, context);
    } catch (...) {
        cot_future.wait();
        throw;
    }
    ReasoningTrace cot_trace = cot_future.get();

    CandidateSet candidates;
    candidates.cot = trace_candidate(cot_trace);
    candidates.at(first) = trace_candidate(first_trace);

    bool run_second = true;
    if (config_.use_scheduler) {
        const auto& a = candidates.cot;
        const auto& b = candidates.at(first);
        // An errored last answer never matches the CoT answer.
        if (!a.is_nothing() && !b.is_nothing() && compare_answers(*a.value, *b.value)) run_second = false;
    }

    out.traces.push_back(cot_trace);
    out.traces.push_back(first_trace);
    if (run_second) {
        auto second_trace = code_and_debug(second, agents, table, question, loop, context);
        candidates.at(second) = trace_candidate(second_trace);
        out.traces.push_back(std::move(second_trace));
    } else {
        candidates.skipped = second;
        record.skipped_path = second;
    }

    out.example = serialize_example(table, question, out.traces, candidates);
    const CandidateSet& final_candidates = out.example.candidates;

    auto finish = [&] { record.call_counts = gateway_.ledger().counts_for(question.id); };

    if (final_candidates.all_nothing()) {
        record.decided_by = DecidedBy::Failed;
        record.error = "no path produced an answer";
        finish();
        throw NoCandidates(std::move(out));
    }

    std::optional<ConfidenceVector> scores;
    bool decided = false;
    if (config_.use_cc) {
        scores = score(out.example, question.id, checker_);
        record.scores = scores->as_array();
        if (auto selected = gate(*scores, config_.theta)) {
            out.final_answer = *final_candidates.at(*selected).value;
            record.decided_by = DecidedBy::ConfidenceGate;
            decided = true;
        }
    }
    if (!decided && config_.use_ja) {
        try {
            out.final_answer = agents.run_judge(table, question, out.traces, final_candidates, scores);
            record.decided_by = DecidedBy::JudgeAgent;
            decided = true;
        } catch (const AgentFailed& e) {
            record.error = std::string("judge failed: ") + e.what();
        }
    }
    if (!decided) {
        out.final_answer = *final_candidates.at(fallback_path(final_candidates, scores)).value;
        record.decided_by = DecidedBy::Fallback;
    }

    if (config_.use_fm && out.final_answer.size() > config_.fm_char_limit) {
        out.final_answer = agents.run_format_matcher(question, out.final_answer);
        record.format_matched = true;
    }

    record.final_answer = out.final_answer;
    finish();
    return out;
}

}  // namespace tabagent
