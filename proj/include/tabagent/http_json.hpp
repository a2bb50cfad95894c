#pragma once

#include <chrono>
#include <functional>
#include <string>

#include <json.hpp>

namespace tabagent {

/// POSTs a JSON body to a URL and returns the parsed JSON reply. Throws
/// std::runtime_error on transport failures, non-200 replies or bad JSON.
using JsonTransport = std::function<nlohmann::json(const std::string& url, const nlohmann::json& body)>;

JsonTransport http_json_transport(std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace tabagent
