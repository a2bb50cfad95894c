#include "tabagent/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "tabagent/metrics.hpp"
#include "tabagent/sql_engine.hpp"

namespace tabagent {

namespace {

template <typename E, std::size_t K>
E parse_enum(const std::string& name, const std::array<E, K>& values) {
    for (E v : values) {
        if (to_string(v) == name) return v;
    }
    throw std::invalid_argument("unknown enum value: " + name);
}

constexpr std::array<Routing, 3> kRoutings = {Routing::PoTFirst, Routing::SQLFirst, Routing::NoScheduler};
constexpr std::array<DecidedBy, 4> kDecisions = {DecidedBy::ConfidenceGate, DecidedBy::JudgeAgent,
                                                 DecidedBy::Fallback, DecidedBy::Failed};
constexpr std::array<Path, 3> kPaths = {Path::CoT, Path::PoT, Path::Text2SQL};

nlohmann::json result_to_json(const ExecutionResult& r) {
    return {{"kind", to_string(r.kind)}, {"payload", r.payload}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json config_json(const PipelineConfig& c) {
    return {{"use_scheduler", c.use_scheduler}, {"use_cc", c.use_cc}, {"use_ja", c.use_ja},
            {"use_fm", c.use_fm},               {"N", c.N},           {"theta", c.theta},
            {"fm_char_limit", c.fm_char_limit}};
}

// Runs fn(i) for i in [0, n) on `jobs` threads; each thread calls init() once.
template <typename Init, typename Fn>
void parallel_for(std::size_t n, int jobs, Init init, Fn fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        auto state = init();
        for (std::size_t i = next++; i < n; i = next++) fn(state, i);
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

int Aggregates::total_calls() const {
    int total = 0;
    for (const auto& [_, n] : calls) total += n;
    return total;
}

Aggregates aggregate(const std::vector<RunRecord>& records) {
    Aggregates a;
    a.n_questions = records.size();
    for (auto role : kAllRoles) a.calls[role] = 0;
    for (const auto& r : records) {
        a.em += r.metrics.em;
        a.fuzzy += r.metrics.fuzzy;
        a.f1 += r.metrics.f1;
        for (auto role : kAllRoles) a.calls[role] += r.calls(role);
        ++a.decided_by[r.decided_by];
        ++a.routing[r.routing];
        if (r.skipped_path) ++a.skipped[*r.skipped_path];
    }
    if (!records.empty()) {
        const double n = static_cast<double>(records.size());
        a.em /= n;
        a.fuzzy /= n;
        a.f1 /= n;
    }
    return a;
}

nlohmann::json record_to_json(const RunRecord& r) {
    nlohmann::json calls = nlohmann::json::object();
    for (auto role : kAllRoles) calls[std::string(to_string(role))] = r.calls(role);
    nlohmann::json j{
        {"question_id", r.question_id},
        {"routing", to_string(r.routing)},
        {"skipped_path", r.skipped_path ? nlohmann::json(to_string(*r.skipped_path)) : nlohmann::json()},
        {"call_counts", calls},
        {"decided_by", to_string(r.decided_by)},
        {"final_answer", r.final_answer},
        {"gold", r.gold},
        {"metrics", {{"em", r.metrics.em}, {"fuzzy", r.metrics.fuzzy}, {"f1", r.metrics.f1}}},
        {"scores", r.scores ? nlohmann::json(*r.scores) : nlohmann::json()},
        {"format_matched", r.format_matched},
        {"error", r.error},
    };
    return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.routing = parse_enum(j.at("routing").get<std::string>(), kRoutings);
    if (!j.at("skipped_path").is_null()) r.skipped_path = parse_enum(j.at("skipped_path").get<std::string>(), kPaths);
    for (const auto& [name, n] : j.at("call_counts").items()) {
        auto role = parse_role(name);
        if (!role) throw std::invalid_argument("unknown role: " + name);
        if (n.get<int>() != 0) r.call_counts[*role] = n.get<int>();
    }
    r.decided_by = parse_enum(j.at("decided_by").get<std::string>(), kDecisions);
    r.final_answer = j.at("final_answer").get<std::string>();
    r.gold = j.value("gold", "");
    const auto& m = j.at("metrics");
    r.metrics = {m.at("em").get<int>(), m.at("fuzzy").get<double>(), m.at("f1").get<double>()};
    if (!j.at("scores").is_null()) r.scores = j.at("scores").get<std::array<double, 3>>();
    r.format_matched = j.at("format_matched").get<bool>();
    r.error = j.value("error", "");
    return r;
}

nlohmann::json trace_to_json(const ReasoningTrace& trace) {
    nlohmann::json iterations = nlohmann::json::array();
    for (const auto& it : trace.iterations) {
        iterations.push_back({{"code", it.code}, {"result", result_to_json(it.result)}});
    }
    nlohmann::json j{{"path", to_string(trace.path)}, {"iterations", iterations}};
    if (trace.solution_text) j["solution"] = *trace.solution_text;
    if (trace.cot_answer) j["answer"] = *trace.cot_answer;
    return j;
}

nlohmann::json report_to_json(const RunReport& report) {
    const auto& a = report.aggregates;
    nlohmann::json calls = nlohmann::json::object();
    for (const auto& [role, n] : a.calls) calls[std::string(to_string(role))] = n;
    calls["total"] = a.total_calls();
    nlohmann::json decided = nlohmann::json::object();
    for (auto d : kDecisions) decided[std::string(to_string(d))] = a.decided_by.count(d) ? a.decided_by.at(d) : 0;
    nlohmann::json routing = nlohmann::json::object();
    for (auto r : kRoutings) routing[std::string(to_string(r))] = a.routing.count(r) ? a.routing.at(r) : 0;
    nlohmann::json skipped = nlohmann::json::object();
    for (auto p : {Path::PoT, Path::Text2SQL}) skipped[std::string(to_string(p))] = a.skipped.count(p) ? a.skipped.at(p) : 0;

    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) records.push_back(record_to_json(r));
    return {
        {"config", config_json(report.config)},
        {"n_questions", a.n_questions},
        {"metrics", {{"em", a.em}, {"fuzzy", a.fuzzy}, {"f1", a.f1}}},
        {"calls", calls},
        {"decided_by", decided},
        {"routing", routing},
        {"skipped", skipped},
        {"records", records},
    };
}

std::string trace_file_stem(const std::string& question_id) {
    std::string out;
    for (char c : question_id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
        out += ok ? c : '_';
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

RunReport run_benchmark(const std::vector<DatasetItem>& items, LlmGateway& gateway,
                        const SandboxFactory& make_sandbox, SchedulerBackend& scheduler,
                        ConfidenceBackend& checker, const BenchmarkOptions& options) {
    options.pipeline.validate();
    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();

    RunReport report;
    report.config = options.pipeline;
    report.records.resize(items.size());
    std::vector<nlohmann::json> trace_docs(items.size());

    parallel_for(
        items.size(), options.jobs,
        [&] { return make_sandbox ? make_sandbox() : std::unique_ptr<SandboxClient>(); },
        [&](std::unique_ptr<SandboxClient>& sandbox, std::size_t i) {
            const auto& item = items[i];
            Pipeline pipeline(gateway, sandbox.get(), scheduler, checker, options.pipeline);
            PipelineResult result;
            try {
                result = pipeline.answer(item.table, item.question);
            } catch (const NoCandidates& e) {
                result = e.partial();
            } catch (const std::exception& e) {
                result.record.question_id = item.question.id;
                result.record.decided_by = DecidedBy::Failed;
                result.record.error = e.what();
                result.record.call_counts = gateway.ledger().counts_for(item.question.id);
            }
            RunRecord& record = result.record;
            record.gold = item.gold;
            record.metrics = metrics::evaluate(record.final_answer, item.gold);

            nlohmann::json traces = nlohmann::json::array();
            for (const auto& t : result.traces) traces.push_back(trace_to_json(t));
            trace_docs[i] = {
                {"record", record_to_json(record)},
                {"serialized", result.example.text},
                {"traces", traces},
                {"path_scores", result.path_scores ? nlohmann::json{{"prob_pot", result.path_scores->prob_pot},
                                                                    {"prob_sql", result.path_scores->prob_sql}}
                                                   : nlohmann::json()},
            };
            report.records[i] = std::move(record);
        });

    report.aggregates = aggregate(report.records);

    if (options.out_dir) {
        const auto& dir = *options.out_dir;
        std::filesystem::create_directories(dir / "traces");
        write_json(dir / "config.json", options.config_snapshot);
        write_json(dir / "report.json", report_to_json(report));
        std::set<std::string> used;
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto stem = trace_file_stem(items[i].question.id);
            if (!used.insert(stem).second) stem += "_" + std::to_string(i);
            write_json(dir / "traces" / (stem + ".json"), trace_docs[i]);
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_json(dir / "metadata.json", {{"started_at", started},
                                           {"finished_at", utc_now()},
                                           {"wall_seconds", seconds},
                                           {"jobs", options.jobs},
                                           {"n_questions", items.size()}});
    }
    return report;
}

GeneratedCandidates generate_candidates(Agents& agents, const Table& table, const Question& question,
                                        const LoopConfig& loop, const ExecutionContext& context) {
    GeneratedCandidates out;
    ReasoningTrace cot;
    cot.path = Path::CoT;
    try {
        auto c = agents.run_cot(table, question);
        cot.solution_text = std::move(c.solution);
        cot.cot_answer = std::move(c.answer);
    } catch (const AgentFailed&) {
    }
    out.traces.push_back(std::move(cot));
    out.traces.push_back(code_and_debug(Path::PoT, agents, table, question, loop, context));
    out.traces.push_back(code_and_debug(Path::Text2SQL, agents, table, question, loop, context));
    for (const auto& t : out.traces) out.candidates.at(t.path) = trace_candidate(t);
    return out;
}

TrainingSummary emit_training_data(const std::vector<DatasetItem>& items, LlmGateway& gateway,
                                   const SandboxFactory& make_sandbox, const std::filesystem::path& out_dir,
                                   const TrainingOptions& options) {
    std::vector<std::optional<SchedulerTrainingRow>> sched(items.size());
    std::vector<std::optional<CcTrainingRow>> cc(items.size());
    std::mutex log_mutex;

    parallel_for(
        items.size(), options.jobs,
        [&] { return make_sandbox ? make_sandbox() : std::unique_ptr<SandboxClient>(); },
        [&](std::unique_ptr<SandboxClient>& sandbox, std::size_t i) {
            const auto& item = items[i];
            try {
                Agents agents(gateway);
                const SqlEnvironment sql(item.table);
                const ExecutionContext context{sandbox.get(), &sql};
                auto generated = generate_candidates(agents, item.table, item.question, options.loop, context);
                const auto& c = generated.candidates;
                auto correct = [&](Path p) {
                    return !c.at(p).is_nothing() && metrics::exact_match(*c.at(p).value, item.gold) == 1;
                };
                sched[i] = SchedulerTrainingRow{item.table, item.question, correct(Path::PoT), correct(Path::Text2SQL)};
                SerializeOptions so;
                so.max_table_rows = options.cc_max_table_rows;
                cc[i] = CcTrainingRow{item.question.id,
                                      serialize_example(item.table, item.question, generated.traces, c, so),
                                      item.gold};
            } catch (const std::exception& e) {
                std::lock_guard lock(log_mutex);
                std::cerr << "emit-train: item " << item.question.id << " failed: " << e.what() << '\n';
            }
        });

    TrainingSummary summary;
    std::vector<SchedulerTrainingRow> sched_rows;
    std::vector<CcTrainingRow> cc_rows;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!sched[i] || !cc[i]) {
            ++summary.failures;
            continue;
        }
        sched_rows.push_back(std::move(*sched[i]));
        cc_rows.push_back(std::move(*cc[i]));
    }
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir / "scheduler_train.tsv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write scheduler_train.tsv");
        emit_training_rows(out, sched_rows);
    }
    {
        std::ofstream out(out_dir / "cc_train.tsv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write cc_train.tsv");
        emit_cc_training_rows(out, cc_rows);
    }
    summary.scheduler_rows = sched_rows.size();
    summary.cc_rows = cc_rows.size();
    return summary;
}

}  // namespace tabagent
