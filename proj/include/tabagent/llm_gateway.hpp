#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tabagent/types.hpp"

namespace tabagent {

struct ChatRequest {
    AgentRole role = AgentRole::CoTA;
    std::string prompt;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string question_id;  // ledger key
};

/// A chat-completion backend. Implementations throw ProviderUnreachable,
/// ProviderError or ProviderTimeout.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Per-question, per-role call counts. Thread-safe; counts only grow.
class CallLedger {
public:
    void record(const std::string& question_id, AgentRole role);
    int count(const std::string& question_id, AgentRole role) const;
    std::map<AgentRole, int> counts_for(const std::string& question_id) const;
    std::map<AgentRole, int> totals() const;
    int total() const;

private:
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, AgentRole>, int> counts_;
};

struct GatewayConfig {
    std::string default_model = "qwen2.5-7b-instruct";
    std::map<AgentRole, std::string> models{{AgentRole::FM, "qwen2.5-0.5b-instruct"}};
    double temperature = 0.0;
    int max_tokens = 1024;

    const std::string& model_for(AgentRole role) const;
};

/// Routes each request to the configured model for its role and counts every
/// outbound call (retries included) in the ledger before it is sent.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<ChatProvider> provider, GatewayConfig config = {});

    std::string complete(ChatRequest request);
    std::string complete(AgentRole role, std::string prompt, const std::string& question_id);

    CallLedger& ledger() noexcept { return ledger_; }
    const CallLedger& ledger() const noexcept { return ledger_; }
    const GatewayConfig& config() const noexcept { return config_; }

private:
    std::shared_ptr<ChatProvider> provider_;
    GatewayConfig config_;
    CallLedger ledger_;
};

/// 64-bit FNV-1a of the prompt bytes as 16 lowercase hex digits.
std::string prompt_hash(std::string_view prompt);

/// Deterministic provider for tests and offline runs.
///
/// Rules are tried in insertion order; a rule matches when the role agrees and
/// its optional prompt hash and `contains` substring both match. A matching
/// rule returns its responses in order and keeps repeating the last one. A
/// response may also be a failure ("!unreachable", "!timeout", "!status:<code>").
class ScriptedProvider final : public ChatProvider {
public:
    struct Rule {
        AgentRole role;
        std::optional<std::string> hash;
        std::optional<std::string> contains;
        std::vector<std::string> responses;
        std::size_t cursor = 0;
    };

    void add_rule(AgentRole role, std::vector<std::string> responses,
                  std::optional<std::string> contains = std::nullopt,
                  std::optional<std::string> hash = std::nullopt);

    /// {"completions": [{"role", "responses" | "response", "contains"?, "hash"?}]}
    static std::shared_ptr<ScriptedProvider> from_json(const nlohmann::json& spec);

    std::string complete(const ChatRequest& request) override;

private:
    std::mutex mutex_;
    std::vector<Rule> rules_;
};

struct HttpProviderConfig {
    std::string endpoint;  // full URL of an OpenAI-style /chat/completions route
    std::string api_key;
    std::chrono::milliseconds timeout = std::chrono::seconds(120);
};

/// POSTs {"model", "messages": [{"role": "user", "content"}], "temperature",
/// "max_tokens"} and returns choices[0].message.content.
class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(HttpProviderConfig config);
    std::string complete(const ChatRequest& request) override;

private:
    HttpProviderConfig config_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
};

/// Splits "http://host:8000/v1/chat" into ("http://host:8000", "/v1/chat").
std::pair<std::string, std::string> split_url(const std::string& url);

/// Pulls the first JSON-like object out of a model response and returns its
/// top-level fields as strings. Accepts code fences, single-quoted keys and
/// strings, triple-quoted values and bare keys. Numbers keep their source text;
/// nested values are re-serialized as JSON. Throws JsonNotFound or MissingKey.
std::map<std::string, std::string> extract_json(std::string_view raw,
                                                const std::vector<std::string>& required_keys);

}  // namespace tabagent
