#include "tabagent/llm_gateway.hpp"

#include <cctype>
#include <cstdio>

#include "tabagent/errors.hpp"
#include "tabagent/table.hpp"

namespace tabagent {

void CallLedger::record(const std::string& question_id, AgentRole role) {
    std::lock_guard lock(mutex_);
    ++counts_[{question_id, role}];
}

int CallLedger::count(const std::string& question_id, AgentRole role) const {
    std::lock_guard lock(mutex_);
    auto it = counts_.find({question_id, role});
    return it == counts_.end() ? 0 : it->second;
}

std::map<AgentRole, int> CallLedger::counts_for(const std::string& question_id) const {
    std::lock_guard lock(mutex_);
    std::map<AgentRole, int> out;
    for (const auto& [key, n] : counts_) {
        if (key.first == question_id) out[key.second] += n;
    }
    return out;
}

std::map<AgentRole, int> CallLedger::totals() const {
    std::lock_guard lock(mutex_);
    std::map<AgentRole, int> out;
    for (const auto& [key, n] : counts_) out[key.second] += n;
    return out;
}

int CallLedger::total() const {
    std::lock_guard lock(mutex_);
    int sum = 0;
    for (const auto& [_, n] : counts_) sum += n;
    return sum;
}

const std::string& GatewayConfig::model_for(AgentRole role) const {
    auto it = models.find(role);
    return it == models.end() ? default_model : it->second;
}

LlmGateway::LlmGateway(std::shared_ptr<ChatProvider> provider, GatewayConfig config)
    : provider_(std::move(provider)), config_(std::move(config)) {}

std::string LlmGateway::complete(ChatRequest request) {
    if (request.model.empty()) request.model = config_.model_for(request.role);
    ledger_.record(request.question_id, request.role);
    if (!provider_) throw ProviderUnreachable(std::string(to_string(request.role)), "no provider configured");
    return provider_->complete(request);
}

std::string LlmGateway::complete(AgentRole role, std::string prompt, const std::string& question_id) {
    ChatRequest request;
    request.role = role;
    request.prompt = std::move(prompt);
    request.temperature = config_.temperature;
    request.max_tokens = config_.max_tokens;
    request.question_id = question_id;
    return complete(std::move(request));
}

// ---------------------------------------------------------------------------

std::string prompt_hash(std::string_view prompt) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : prompt) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ScriptedProvider::add_rule(AgentRole role, std::vector<std::string> responses,
                                std::optional<std::string> contains, std::optional<std::string> hash) {
    std::lock_guard lock(mutex_);
    rules_.push_back({role, std::move(hash), std::move(contains), std::move(responses), 0});
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(const nlohmann::json& spec) {
    auto provider = std::make_shared<ScriptedProvider>();
    if (!spec.contains("completions")) return provider;
    for (const auto& entry : spec.at("completions")) {
        const auto role_name = entry.at("role").get<std::string>();
        auto role = parse_role(role_name);
        if (!role) throw ConfigError("unknown role in script: " + role_name);
        std::vector<std::string> responses;
        if (entry.contains("responses")) {
            responses = entry.at("responses").get<std::vector<std::string>>();
        } else {
            responses.push_back(entry.at("response").get<std::string>());
        }
        std::optional<std::string> contains;
        std::optional<std::string> hash;
        if (entry.contains("contains")) contains = entry.at("contains").get<std::string>();
        if (entry.contains("hash")) hash = entry.at("hash").get<std::string>();
        provider->add_rule(*role, std::move(responses), std::move(contains), std::move(hash));
    }
    return provider;
}

std::string ScriptedProvider::complete(const ChatRequest& request) {
    std::string response;
    {
        std::lock_guard lock(mutex_);
        std::optional<std::string> hash;
        Rule* match = nullptr;
        for (auto& rule : rules_) {
            if (rule.role != request.role || rule.responses.empty()) continue;
            if (rule.hash) {
                if (!hash) hash = prompt_hash(request.prompt);
                if (*rule.hash != *hash) continue;
            }
            if (rule.contains && request.prompt.find(*rule.contains) == std::string::npos) continue;
            match = &rule;
            break;
        }
        const std::string role(to_string(request.role));
        if (match == nullptr) throw ProviderError(role, 404, "no scripted completion matches");
        response = match->responses[std::min(match->cursor, match->responses.size() - 1)];
        ++match->cursor;
    }
    const std::string role(to_string(request.role));
    if (response == "!unreachable") throw ProviderUnreachable(role, "scripted outage");
    if (response == "!timeout") throw ProviderTimeout(role, "scripted timeout");
    if (response.rfind("!status:", 0) == 0) {
        throw ProviderError(role, std::stoi(response.substr(8)), "scripted failure");
    }
    return response;
}

// ---------------------------------------------------------------------------

namespace {

// Lenient reader for the JSON-ish objects models produce.
class LenientParser {
public:
    explicit LenientParser(std::string_view s, std::size_t pos) : s_(s), i_(pos) {}

    struct Field {
        nlohmann::json value;
        std::string text;  // source rendering for top-level extraction
    };

    std::optional<std::map<std::string, Field>> object_fields() {
        if (!eat('{')) return std::nullopt;
        std::map<std::string, Field> fields;
        skip();
        if (eat('}')) return fields;
        for (;;) {
            skip();
            auto key = parse_key();
            if (!key) return std::nullopt;
            skip();
            if (!eat(':')) return std::nullopt;
            skip();
            auto value = parse_value();
            if (!value) return std::nullopt;
            fields.emplace(std::move(*key), std::move(*value));
            skip();
            if (eat('}')) return fields;
            if (!eat(',')) return std::nullopt;
            skip();
            if (eat('}')) return fields;  // trailing comma
        }
    }

private:
    std::optional<std::string> parse_key() {
        if (i_ < s_.size() && (s_[i_] == '"' || s_[i_] == '\'' || s_[i_] == '`')) return parse_string();
        std::string key;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) {
            key += s_[i_++];
        }
        if (key.empty()) return std::nullopt;
        return key;
    }

    std::optional<Field> parse_value() {
        if (i_ >= s_.size()) return std::nullopt;
        char c = s_[i_];
        if (c == '"' || c == '\'' || c == '`') {
            auto str = parse_string();
            if (!str) return std::nullopt;
            return Field{*str, *str};
        }
        if (c == '{') {
            auto fields = object_fields();
            if (!fields) return std::nullopt;
            nlohmann::json obj = nlohmann::json::object();
            for (auto& [k, f] : *fields) obj[k] = std::move(f.value);
            return Field{obj, obj.dump()};
        }
        if (c == '[') {
            ++i_;
            nlohmann::json arr = nlohmann::json::array();
            skip();
            if (eat(']')) return Field{arr, arr.dump()};
            for (;;) {
                skip();
                auto item = parse_value();
                if (!item) return std::nullopt;
                arr.push_back(std::move(item->value));
                skip();
                if (eat(']')) return Field{arr, arr.dump()};
                if (!eat(',')) return std::nullopt;
                skip();
                if (eat(']')) return Field{arr, arr.dump()};
            }
        }
        std::string token;
        while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
               !std::isspace(static_cast<unsigned char>(s_[i_]))) {
            token += s_[i_++];
        }
        if (token.empty()) return std::nullopt;
        if (token == "true" || token == "True") return Field{true, token};
        if (token == "false" || token == "False") return Field{false, token};
        if (token == "null" || token == "None") return Field{nullptr, ""};
        auto number = nlohmann::json::parse(token, nullptr, false);
        if (number.is_discarded() || !number.is_number()) return std::nullopt;
        return Field{number, token};
    }

    std::optional<std::string> parse_string() {
        static constexpr std::string_view kTriples[] = {"'''", "\"\"\"", "```"};
        for (auto open : kTriples) {
            if (s_.substr(i_, 3) != open) continue;
            i_ += 3;
            // A ``` opener may be closed by ''' (as in some few-shot exemplars).
            std::size_t end = s_.find(open, i_);
            if (open == "```") end = std::min(end, s_.find("'''", i_));
            if (end == std::string_view::npos) return std::nullopt;
            std::string out(s_.substr(i_, end - i_));
            i_ = end + 3;
            return out;
        }
        const char quote = s_[i_++];
        std::string out;
        while (i_ < s_.size() && s_[i_] != quote) {
            char c = s_[i_++];
            if (c != '\\' || i_ >= s_.size()) {
                out += c;
                continue;
            }
            char e = s_[i_++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'u': {
                    if (i_ + 4 > s_.size()) return std::nullopt;
                    auto decoded = nlohmann::json::parse("\"\\u" + std::string(s_.substr(i_, 4)) + "\"", nullptr, false);
                    if (decoded.is_discarded()) return std::nullopt;
                    out += decoded.get<std::string>();
                    i_ += 4;
                    break;
                }
                default: out += e;
            }
        }
        if (!eat(quote)) return std::nullopt;
        return out;
    }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    bool eat(char c) {
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    std::string_view s_;
    std::size_t i_;
};

}  // namespace

std::map<std::string, std::string> extract_json(std::string_view raw,
                                                const std::vector<std::string>& required_keys) {
    for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
        auto fields = LenientParser(raw, pos).object_fields();
        if (!fields || fields->empty()) continue;
        std::map<std::string, std::string> out;
        for (auto& [key, field] : *fields) out.emplace(key, std::move(field.text));
        for (const auto& key : required_keys) {
            if (out.count(key)) continue;
            // Fall back to a case-insensitive match on the key name.
            bool found = false;
            for (const auto& [k, v] : out) {
                if (to_lower(k) == to_lower(key)) {
                    out.emplace(key, v);
                    found = true;
                    break;
                }
            }
            if (!found) throw MissingKey(key);
        }
        return out;
    }
    throw JsonNotFound("no JSON object in response");
}

}  // namespace tabagent
