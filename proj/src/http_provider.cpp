#include <httplib.h>

#include "tabagent/errors.hpp"
#include "tabagent/http_json.hpp"
#include "tabagent/llm_gateway.hpp"

namespace tabagent {

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("chat endpoint URL is empty");
    std::tie(base_, path_) = split_url(config_.endpoint);
}

std::string HttpChatProvider::complete(const ChatRequest& request) {
    const std::string role(to_string(request.role));
    httplib::Client client(base_);
    if (!client.is_valid()) throw ProviderUnreachable(role, "unsupported endpoint: " + config_.endpoint);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(std::min<std::time_t>(seconds.count(), 30), 0);
    client.set_read_timeout(seconds.count(), 0);
    client.set_write_timeout(seconds.count(), 0);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    nlohmann::json body{{"model", request.model},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
                        {"temperature", request.temperature},
                        {"max_tokens", request.max_tokens}};

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read) throw ProviderTimeout(role, "no response from " + config_.endpoint);
        throw ProviderUnreachable(role, httplib::to_string(err) + " (" + config_.endpoint + ")");
    }
    if (res->status != 200) throw ProviderError(role, res->status, res->body.substr(0, 500));

    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw ProviderError(role, res->status, "response is not JSON");
    try {
        const auto& content = parsed.at("choices").at(0).at("message").at("content");
        return content.is_string() ? content.get<std::string>() : content.dump();
    } catch (const nlohmann::json::exception&) {
        throw ProviderError(role, res->status, "response has no choices[0].message.content");
    }
}

JsonTransport http_json_transport(std::chrono::milliseconds timeout) {
    return [timeout](const std::string& url, const nlohmann::json& body) {
        const auto [base, path] = split_url(url);
        httplib::Client client(base);
        if (!client.is_valid()) throw std::runtime_error("unsupported endpoint: " + url);
        const auto seconds = std::max<std::time_t>(1, std::chrono::duration_cast<std::chrono::seconds>(timeout).count());
        client.set_connection_timeout(seconds, 0);
        client.set_read_timeout(seconds, 0);
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res) throw std::runtime_error(httplib::to_string(res.error()) + " (" + url + ")");
        if (res->status != 200) throw std::runtime_error("HTTP " + std::to_string(res->status) + " from " + url);
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) throw std::runtime_error("reply from " + url + " is not JSON");
        return parsed;
    };
}

}  // namespace tabagent
