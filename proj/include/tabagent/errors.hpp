#pragma once

#include <stdexcept>
#include <string>

namespace tabagent {

class MalformedTable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedDataset : public std::runtime_error {
public:
    MalformedDataset(std::size_t index, const std::string& what)
        : std::runtime_error("item " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by scorer backends that cannot produce scores; callers fall back
/// to the heuristic backend.
class ScorerUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SandboxUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Gateway failures. Each carries the role name of the call that failed.
class ProviderFailure : public std::runtime_error {
public:
    ProviderFailure(std::string role, const std::string& what)
        : std::runtime_error(role + ": " + what), role_(std::move(role)) {}

    const std::string& role() const noexcept { return role_; }

private:
    std::string role_;
};

class ProviderUnreachable : public ProviderFailure {
public:
    using ProviderFailure::ProviderFailure;
};

class ProviderError : public ProviderFailure {
public:
    ProviderError(std::string role, int status, const std::string& what)
        : ProviderFailure(std::move(role), "HTTP " + std::to_string(status) + ": " + what),
          status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

class ProviderTimeout : public ProviderFailure {
public:
    using ProviderFailure::ProviderFailure;
};

class JsonNotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingKey : public std::runtime_error {
public:
    explicit MissingKey(std::string key)
        : std::runtime_error("missing key: " + key), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class AgentFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tabagent
