#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tabagent/benchmark.hpp"
#include "tabagent/errors.hpp"
#include "tabagent/metrics.hpp"
#include "tabagent/settings.hpp"

namespace {

using namespace tabagent;

constexpr int kExitDataset = 1;
constexpr int kExitConfig = 2;

struct DatasetArgs {
    std::string path;
    std::string format = "generic-json";
    std::string manifest;
    std::vector<std::string> include;
    std::vector<std::string> exclude;
};

struct CommonArgs {
    std::string config;
    std::vector<std::string> set;  // key=value overrides
    std::string provider, script, sandbox, sandbox_script;
    std::optional<int> jobs;
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& d) {
    cmd->add_option("--dataset", d.path, "Dataset file")->required();
    cmd->add_option("--format", d.format, "generic-json | tablebench-jsonl | penguins-json");
    cmd->add_option("--manifest", d.manifest, "Field-name manifest (JSON) for tablebench-jsonl");
    cmd->add_option("--include-category", d.include, "Keep only these categories");
    cmd->add_option("--exclude-category", d.exclude, "Drop these categories");
}

void add_common_options(CLI::App* cmd, CommonArgs& c) {
    cmd->add_option("--config", c.config, "key = value config file");
    cmd->add_option("--set", c.set, "Extra key=value setting (repeatable)");
    cmd->add_option("--provider", c.provider, "http | scripted");
    cmd->add_option("--script", c.script, "Scripted provider fixture (JSON)");
    cmd->add_option("--sandbox", c.sandbox, "Sandbox runner command, or 'scripted'");
    cmd->add_option("--sandbox-script", c.sandbox_script, "Scripted sandbox fixture (JSON)");
    cmd->add_option("--jobs", c.jobs, "Worker threads");
}

// Defaults, then config file, then environment, then flags.
Settings build_settings(const CommonArgs& c) {
    Settings s;
    if (!c.config.empty()) s.apply_file(c.config);
    s.apply_env();
    for (const auto& kv : c.set) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        s.apply(std::string(trim(kv.substr(0, eq))), std::string(trim(kv.substr(eq + 1))));
    }
    if (!c.provider.empty()) s.provider = c.provider;
    if (!c.script.empty()) s.script = c.script;
    if (!c.sandbox.empty()) s.sandbox = c.sandbox;
    if (!c.sandbox_script.empty()) s.sandbox_script = c.sandbox_script;
    if (c.jobs) s.jobs = *c.jobs;
    return s;
}

DatasetSpec build_dataset_spec(const DatasetArgs& d) {
    DatasetSpec spec;
    auto format = parse_dataset_format(d.format);
    if (!format) throw ConfigError("unknown dataset format: " + d.format);
    spec.format = *format;
    spec.path = d.path;
    spec.include_categories = {d.include.begin(), d.include.end()};
    spec.exclude_categories = {d.exclude.begin(), d.exclude.end()};
    if (!d.manifest.empty()) {
        std::ifstream in(d.manifest);
        if (!in) throw ConfigError("cannot read manifest: " + d.manifest);
        auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("manifest is not valid JSON: " + d.manifest);
        spec.manifest = TableBenchManifest::from_json(doc);
    }
    return spec;
}

std::vector<DatasetItem> load_items(const DatasetSpec& spec) {
    if (!std::filesystem::exists(spec.path)) throw MalformedDataset(0, "dataset not found: " + spec.path);
    return load_dataset(spec);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// A JSON object maps ids to answers; anything else is one answer per line.
std::vector<std::pair<std::string, std::string>> read_answers(const std::string& path) {
    const auto text = read_text(path);
    std::vector<std::pair<std::string, std::string>> out;
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
        for (const auto& [id, v] : doc.items()) {
            out.emplace_back(id, v.is_string() ? v.get<std::string>() : json_cell(v).value_or(""));
        }
        return out;
    }
    std::istringstream in(text);
    std::string line;
    for (std::size_t i = 0; std::getline(in, line); ++i) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.emplace_back(std::to_string(i), line);
    }
    return out;
}

int cmd_score(const std::string& pred_file, const std::string& gold_file) {
    auto preds = read_answers(pred_file);
    auto golds = read_answers(gold_file);
    std::map<std::string, std::string> gold_by_id(golds.begin(), golds.end());
    std::vector<RunRecord> records;
    for (const auto& [id, pred] : preds) {
        auto it = gold_by_id.find(id);
        if (it == gold_by_id.end()) throw MalformedDataset(records.size(), "no gold answer for '" + id + "'");
        RunRecord r;
        r.question_id = id;
        r.final_answer = pred;
        r.gold = it->second;
        r.metrics = metrics::evaluate(pred, it->second);
        records.push_back(std::move(r));
    }
    if (records.size() != golds.size()) {
        throw MalformedDataset(records.size(), "prediction and gold counts differ");
    }
    auto a = aggregate(records);
    nlohmann::json out{{"n", a.n_questions}, {"em", a.em}, {"fuzzy", a.fuzzy}, {"f1", a.f1}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Table question answering with routed reasoning paths"};
    app.require_subcommand(1);

    DatasetArgs run_data;
    CommonArgs run_common;
    bool no_scheduler = false, no_cc = false, no_ja = false, no_fm = false;
    std::optional<double> theta;
    std::optional<int> n_rounds;
    std::string scheduler_mode, cc_mode, weights, stub_scores, out_dir;
    auto* run = app.add_subcommand("run", "Answer every dataset question and write a report");
    add_dataset_options(run, run_data);
    add_common_options(run, run_common);
    run->add_flag("--no-scheduler", no_scheduler, "Run PoT then text2SQL without routing");
    run->add_flag("--no-cc", no_cc, "Skip the confidence checker");
    run->add_flag("--no-ja", no_ja, "Skip the judge agent");
    run->add_flag("--no-fm", no_fm, "Skip the format matcher");
    run->add_option("--theta", theta, "Confidence gate threshold");
    run->add_option("--n", n_rounds, "Maximum debug rounds");
    run->add_option("--scheduler", scheduler_mode, "off | heuristic | linear | remote");
    run->add_option("--cc", cc_mode, "off | heuristic | stub | remote");
    run->add_option("--weights", weights, "Linear scheduler weights file");
    run->add_option("--stub-scores", stub_scores, "Stub confidence scores (JSON)");
    run->add_option("--out", out_dir, "Run directory");

    DatasetArgs train_data;
    CommonArgs train_common;
    std::string train_out;
    auto* train = app.add_subcommand("emit-train", "Write scheduler and checker training rows");
    add_dataset_options(train, train_data);
    add_common_options(train, train_common);
    train->add_option("--out", train_out, "Output directory")->required();

    std::string pred_file, gold_file;
    auto* score = app.add_subcommand("score", "Score predictions against gold answers");
    score->add_option("--pred-file", pred_file, "Predictions")->required();
    score->add_option("--gold-file", gold_file, "Gold answers")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (score->parsed()) return cmd_score(pred_file, gold_file);

        if (run->parsed()) {
            auto settings = build_settings(run_common);
            if (!scheduler_mode.empty()) settings.apply("scheduler", scheduler_mode);
            if (!cc_mode.empty()) settings.apply("cc", cc_mode);
            if (!weights.empty()) settings.weights = weights;
            if (!stub_scores.empty()) settings.stub_scores = stub_scores;
            if (no_scheduler) settings.pipeline.use_scheduler = false;
            if (no_cc) settings.pipeline.use_cc = false;
            if (no_ja) settings.pipeline.use_ja = false;
            if (no_fm) settings.pipeline.use_fm = false;
            if (theta) settings.pipeline.theta = *theta;
            if (n_rounds) settings.pipeline.N = *n_rounds;
            settings.validate();
            const auto spec = build_dataset_spec(run_data);
            const auto items = load_items(spec);

            LlmGateway gateway(make_provider(settings), settings.gateway);
            auto scheduler = make_scheduler(settings);
            auto checker = make_checker(settings);
            BenchmarkOptions options;
            options.pipeline = settings.pipeline;
            options.jobs = settings.jobs;
            if (!out_dir.empty()) options.out_dir = out_dir;
            options.config_snapshot = settings.to_json();
            options.config_snapshot["dataset"] = {{"path", spec.path}, {"format", to_string(spec.format)}};
            auto report = run_benchmark(items, gateway, make_sandbox_factory(settings), *scheduler, *checker, options);
            const auto& a = report.aggregates;
            std::cout << "questions " << a.n_questions << "  EM " << a.em << "  fuzzy " << a.fuzzy << "  F1 "
                      << a.f1 << "  calls " << a.total_calls() << '\n';
            return 0;
        }

        if (train->parsed()) {
            auto settings = build_settings(train_common);
            settings.validate();
            const auto items = load_items(build_dataset_spec(train_data));
            LlmGateway gateway(make_provider(settings), settings.gateway);
            TrainingOptions options;
            options.loop.max_debug_rounds = settings.pipeline.N;
            options.loop.pot_threshold = settings.pipeline.pot_threshold;
            options.loop.require_equal_results = settings.pipeline.require_equal_results;
            options.jobs = settings.jobs;
            auto summary = emit_training_data(items, gateway, make_sandbox_factory(settings), train_out, options);
            std::cout << "scheduler rows " << summary.scheduler_rows << "  cc rows " << summary.cc_rows
                      << "  failures " << summary.failures << '\n';
            return 0;
        }
    } catch (const MalformedDataset& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return kExitDataset;
    } catch (const MalformedTable& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return kExitDataset;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
