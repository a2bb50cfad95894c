#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tabagent/confidence.hpp"
#include "tabagent/llm_gateway.hpp"
#include "tabagent/pipeline.hpp"
#include "tabagent/sandbox.hpp"
#include "tabagent/scheduler.hpp"

namespace tabagent {

/// Everything a run needs besides the dataset. Populated from defaults, then a
/// key=value config file, then environment variables, then CLI flags.
struct Settings {
    std::string provider = "http";  // http | scripted
    std::string script;             // scripted provider fixture
    HttpProviderConfig http;
    GatewayConfig gateway;

    std::string sandbox = "python3 -m sandbox_runner";  // command, or "scripted"
    std::string sandbox_script;                          // ScriptedSandbox fixture
    std::chrono::milliseconds exec_timeout = std::chrono::seconds(10);

    std::string scheduler = "heuristic";  // off | heuristic | linear | remote
    std::string weights;
    std::string scheduler_url;

    std::string cc = "heuristic";  // off | heuristic | stub | remote
    std::string stub_scores;
    std::string cc_url;

    PipelineConfig pipeline;
    int jobs = 1;

    /// Applies "key = value" lines. Setting scheduler or cc to "off" also
    /// clears the matching pipeline switch. Keys: provider, script, endpoint, api_key,
    /// provider_timeout_ms, model, model.<ROLE>, temperature, max_tokens,
    /// sandbox, sandbox_script, exec_timeout_ms, scheduler, weights,
    /// scheduler_url, cc, stub_scores, cc_url, theta, n, fm_char_limit,
    /// pot_threshold, require_equal_results, judge_sees_scores, use_fm,
    /// use_ja, jobs. Throws ConfigError on unknown keys or bad values.
    void apply_text(std::string_view text);
    void apply_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);

    /// TABAGENT_ENDPOINT, TABAGENT_API_KEY, TABAGENT_MODEL and
    /// TABAGENT_MODEL_<ROLE>. `getenv` is injectable for tests.
    void apply_env(const std::function<std::optional<std::string>(const std::string&)>& getenv);
    void apply_env();

    /// Snapshot for the run directory; the API key is never written.
    nlohmann::json to_json() const;

    /// Checks the mode strings and the files they need. Throws ConfigError.
    void validate() const;
};

std::shared_ptr<ChatProvider> make_provider(const Settings& settings);
/// Returns a factory so each worker gets its own runner process.
std::function<std::unique_ptr<SandboxClient>()> make_sandbox_factory(const Settings& settings);
/// The heuristic when the scheduler is off (it is then never consulted).
std::unique_ptr<SchedulerBackend> make_scheduler(const Settings& settings, JsonTransport transport = {});
/// The agreement heuristic when the checker is off (it is then never consulted).
std::unique_ptr<ConfidenceBackend> make_checker(const Settings& settings, JsonTransport transport = {});

}  // namespace tabagent
