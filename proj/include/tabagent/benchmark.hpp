#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabagent/confidence.hpp"
#include "tabagent/dataset.hpp"
#include "tabagent/llm_gateway.hpp"
#include "tabagent/pipeline.hpp"
#include "tabagent/sandbox.hpp"
#include "tabagent/scheduler.hpp"

namespace tabagent {

using SandboxFactory = std::function<std::unique_ptr<SandboxClient>()>;

struct Aggregates {
    std::size_t n_questions = 0;
    double em = 0.0;
    double fuzzy = 0.0;
    double f1 = 0.0;
    std::map<AgentRole, int> calls;
    std::map<DecidedBy, int> decided_by;
    std::map<Routing, int> routing;
    std::map<Path, int> skipped;

    int total_calls() const;
};

/// Recomputes every aggregate from the records alone.
Aggregates aggregate(const std::vector<RunRecord>& records);

struct RunReport {
    PipelineConfig config;
    std::vector<RunRecord> records;  // dataset order
    Aggregates aggregates;
};

nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);
nlohmann::json trace_to_json(const ReasoningTrace& trace);

/// Deterministic: no timestamps or host details.
nlohmann::json report_to_json(const RunReport& report);

struct BenchmarkOptions {
    PipelineConfig pipeline;
    int jobs = 1;
    /// When set, receives config.json, report.json, metadata.json and
    /// traces/<question id>.json.
    std::optional<std::filesystem::path> out_dir;
    nlohmann::json config_snapshot = nlohmann::json::object();
};

/// Runs every item through the pipeline on a pool of `jobs` workers, each with
/// its own sandbox from `make_sandbox`. Per-question failures become records
/// decided by Failed; nothing short of an IO error aborts the run.
RunReport run_benchmark(const std::vector<DatasetItem>& items, LlmGateway& gateway,
                        const SandboxFactory& make_sandbox, SchedulerBackend& scheduler,
                        ConfidenceBackend& checker, const BenchmarkOptions& options);

struct TrainingOptions {
    LoopConfig loop;
    std::size_t cc_max_table_rows = 100;
    int jobs = 1;
};

struct TrainingSummary {
    std::size_t scheduler_rows = 0;
    std::size_t cc_rows = 0;
    std::size_t failures = 0;
};

/// All three paths, unscheduled, for every item; then scheduler_train.tsv
/// (EM labels) and cc_train.tsv (soft labels) in out_dir.
TrainingSummary emit_training_data(const std::vector<DatasetItem>& items, LlmGateway& gateway,
                                   const SandboxFactory& make_sandbox, const std::filesystem::path& out_dir,
                                   const TrainingOptions& options = {});

/// CoT, PoT and text2SQL traces plus their candidates, without routing.
struct GeneratedCandidates {
    std::vector<ReasoningTrace> traces;
    CandidateSet candidates;
};

GeneratedCandidates generate_candidates(Agents& agents, const Table& table, const Question& question,
                                        const LoopConfig& loop, const ExecutionContext& context);

/// Id made safe for a file name: [A-Za-z0-9._-] kept, everything else '_'.
std::string trace_file_stem(const std::string& question_id);

}  // namespace tabagent
