#include "tabagent/settings.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tabagent/errors.hpp"

namespace tabagent {

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
    const auto s = to_lower(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + v + "'");
}

long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long n = std::stol(v, &used);
        if (used == v.size()) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

nlohmann::json read_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + what + ": " + path);
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError(what + " is not valid JSON: " + path);
    return doc;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " path is required");
    if (!std::filesystem::exists(path)) throw ConfigError(what + " not found: " + path);
}

}  // namespace

void Settings::apply(const std::string& key, const std::string& value) {
    if (key == "provider") provider = value;
    else if (key == "script") script = value;
    else if (key == "endpoint") http.endpoint = value;
    else if (key == "api_key") http.api_key = value;
    else if (key == "provider_timeout_ms") http.timeout = std::chrono::milliseconds(parse_int(key, value));
    else if (key == "model") gateway.default_model = value;
    else if (key.rfind("model.", 0) == 0) {
        auto role = parse_role(key.substr(6));
        if (!role) throw ConfigError("unknown role in key: " + key);
        gateway.models[*role] = value;
    }
    else if (key == "temperature") gateway.temperature = parse_double(key, value);
    else if (key == "max_tokens") gateway.max_tokens = static_cast<int>(parse_int(key, value));
    else if (key == "sandbox") sandbox = value;
    else if (key == "sandbox_script") sandbox_script = value;
    else if (key == "exec_timeout_ms") exec_timeout = std::chrono::milliseconds(parse_int(key, value));
    else if (key == "scheduler") {
        scheduler = value;
        pipeline.use_scheduler = value != "off";
    }
    else if (key == "weights") weights = value;
    else if (key == "scheduler_url") scheduler_url = value;
    else if (key == "cc") {
        cc = value;
        pipeline.use_cc = value != "off";
    }
    else if (key == "stub_scores") stub_scores = value;
    else if (key == "cc_url") cc_url = value;
    else if (key == "theta") pipeline.theta = parse_double(key, value);
    else if (key == "n") pipeline.N = static_cast<int>(parse_int(key, value));
    else if (key == "fm_char_limit") pipeline.fm_char_limit = static_cast<std::size_t>(parse_int(key, value));
    else if (key == "pot_threshold") pipeline.pot_threshold = parse_double(key, value);
    else if (key == "require_equal_results") pipeline.require_equal_results = parse_bool(key, value);
    else if (key == "judge_sees_scores") pipeline.judge_sees_scores = parse_bool(key, value);
    else if (key == "use_fm") pipeline.use_fm = parse_bool(key, value);
    else if (key == "use_ja") pipeline.use_ja = parse_bool(key, value);
    else if (key == "jobs") jobs = static_cast<int>(parse_int(key, value));
    else throw ConfigError("unknown config key: " + key);
}

void Settings::apply_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        apply(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
    }
}

void Settings::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    apply_text(buf.str());
}

void Settings::apply_env(const std::function<std::optional<std::string>(const std::string&)>& getenv) {
    if (auto v = getenv("TABAGENT_ENDPOINT")) http.endpoint = *v;
    if (auto v = getenv("TABAGENT_API_KEY")) http.api_key = *v;
    if (auto v = getenv("TABAGENT_MODEL")) gateway.default_model = *v;
    for (auto role : kAllRoles) {
        if (auto v = getenv("TABAGENT_MODEL_" + std::string(to_string(role)))) gateway.models[role] = *v;
    }
}

void Settings::apply_env() {
    apply_env([](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (v == nullptr) return std::nullopt;
        return std::string(v);
    });
}

nlohmann::json Settings::to_json() const {
    nlohmann::json models = nlohmann::json::object();
    for (auto role : kAllRoles) models[std::string(to_string(role))] = gateway.model_for(role);
    return {
        {"provider", provider},
        {"script", script},
        {"endpoint", http.endpoint},
        {"models", models},
        {"temperature", gateway.temperature},
        {"max_tokens", gateway.max_tokens},
        {"sandbox", sandbox},
        {"sandbox_script", sandbox_script},
        {"exec_timeout_ms", exec_timeout.count()},
        {"scheduler", scheduler},
        {"weights", weights},
        {"scheduler_url", scheduler_url},
        {"cc", cc},
        {"stub_scores", stub_scores},
        {"cc_url", cc_url},
        {"use_scheduler", pipeline.use_scheduler},
        {"use_cc", pipeline.use_cc},
        {"use_ja", pipeline.use_ja},
        {"use_fm", pipeline.use_fm},
        {"n", pipeline.N},
        {"theta", pipeline.theta},
        {"fm_char_limit", pipeline.fm_char_limit},
        {"pot_threshold", pipeline.pot_threshold},
        {"require_equal_results", pipeline.require_equal_results},
        {"judge_sees_scores", pipeline.judge_sees_scores},
        {"jobs", jobs},
    };
}

void Settings::validate() const {
    pipeline.validate();
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (provider == "scripted") require_file(script, "provider script");
    else if (provider == "http") {
        if (http.endpoint.empty()) throw ConfigError("http provider needs an endpoint (config or TABAGENT_ENDPOINT)");
    } else {
        throw ConfigError("unknown provider: " + provider);
    }
    if (sandbox == "scripted") require_file(sandbox_script, "sandbox script");
    else if (sandbox.empty()) throw ConfigError("sandbox command is empty");

    if (scheduler == "linear") require_file(weights, "scheduler weights");
    else if (scheduler == "remote") {
        if (scheduler_url.empty()) throw ConfigError("remote scheduler needs scheduler_url");
    } else if (scheduler != "off" && scheduler != "heuristic") {
        throw ConfigError("unknown scheduler mode: " + scheduler);
    }
    if (cc == "stub") require_file(stub_scores, "stub scores");
    else if (cc == "remote") {
        if (cc_url.empty()) throw ConfigError("remote checker needs cc_url");
    } else if (cc != "off" && cc != "heuristic") {
        throw ConfigError("unknown checker mode: " + cc);
    }
}

std::shared_ptr<ChatProvider> make_provider(const Settings& settings) {
    if (settings.provider == "scripted") {
        return ScriptedProvider::from_json(read_json_file(settings.script, "provider script"));
    }
    return std::make_shared<HttpChatProvider>(settings.http);
}

std::function<std::unique_ptr<SandboxClient>()> make_sandbox_factory(const Settings& settings) {
    if (settings.sandbox == "scripted") {
        auto spec = read_json_file(settings.sandbox_script, "sandbox script");
        return [spec]() -> std::unique_ptr<SandboxClient> { return ScriptedSandbox::from_json(spec); };
    }
    const auto command = settings.sandbox;
    const auto timeout = settings.exec_timeout;
    return [command, timeout]() -> std::unique_ptr<SandboxClient> {
        return std::make_unique<ProcessSandboxClient>(command, timeout);
    };
}

std::unique_ptr<SchedulerBackend> make_scheduler(const Settings& settings, JsonTransport transport) {
    if (settings.scheduler == "linear") {
        return std::make_unique<LinearScheduler>(LinearScheduler::from_file(settings.weights));
    }
    if (settings.scheduler == "remote") {
        return std::make_unique<RemoteScheduler>(settings.scheduler_url,
                                                 transport ? transport : http_json_transport());
    }
    return std::make_unique<HeuristicScheduler>();
}

std::unique_ptr<ConfidenceBackend> make_checker(const Settings& settings, JsonTransport transport) {
    if (settings.cc == "stub") return std::make_unique<StubBackend>(StubBackend::from_file(settings.stub_scores));
    if (settings.cc == "remote") {
        return std::make_unique<RemoteConfidenceBackend>(settings.cc_url, transport ? transport : http_json_transport());
    }
    return std::make_unique<AgreementBackend>();
}

}  // namespace tabagent
