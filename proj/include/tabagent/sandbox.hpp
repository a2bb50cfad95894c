#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabagent/table.hpp"
#include "tabagent/types.hpp"

namespace tabagent {

/// AST / opcode similarity reported by the sandbox. A component is nullopt
/// when either code string failed to parse or compile.
struct CodeSimilarity {
    std::optional<double> ast;
    std::optional<double> opcode;
};

/// Runs generated PoT code against a dataframe built from the table. One
/// request in flight per instance; implementations serialize internally.
class SandboxClient {
public:
    virtual ~SandboxClient() = default;

    /// Never throws for code-level failures: errors, timeouts and a missing
    /// `ans` come back as ExecutionResult. A dead or absent runner yields an
    /// Error whose payload starts with "SandboxUnavailable".
    virtual ExecutionResult execute(const Table& table, std::string_view code) = 0;

    /// Throws SandboxUnavailable when no runner can answer.
    virtual CodeSimilarity similarity(std::string_view code_a, std::string_view code_b) = 0;
};

namespace sandbox_protocol {

inline constexpr int kVersion = 1;

/// {"protocol":1,"id":N,"kind":"exec","columns":[...],"rows":[[...]],"code":"...","timeout_ms":T}
/// Cells are typed per column: integers and decimals as JSON numbers, text as
/// strings, missing values as null.
nlohmann::json exec_request(std::uint64_t id, const Table& table, std::string_view code,
                            std::chrono::milliseconds timeout);

/// {"protocol":1,"id":N,"kind":"similarity","code_a":"...","code_b":"..."}
nlohmann::json similarity_request(std::uint64_t id, std::string_view code_a,
                                  std::string_view code_b);

/// Typed JSON cell values used in exec requests.
nlohmann::json typed_rows(const Table& table);

/// Maps a value/error/timeout response onto an ExecutionResult. Errors are
/// rendered "<type>: <message>"; a MissingAns error keeps that type name.
ExecutionResult decode_exec_response(const nlohmann::json& response);

CodeSimilarity decode_similarity_response(const nlohmann::json& response);

}  // namespace sandbox_protocol

/// Talks to a sandbox runner child process over line-delimited JSON on its
/// standard streams. The runner announces {"protocol":1,"kind":"hello"} on
/// startup; the client refuses other versions.
class ProcessSandboxClient final : public SandboxClient {
public:
    /// `command` is run through /bin/sh -c. The process starts lazily and is
    /// restarted after a crash or timeout.
    explicit ProcessSandboxClient(std::string command,
                                  std::chrono::milliseconds timeout = std::chrono::seconds(10));
    ~ProcessSandboxClient() override;

    ProcessSandboxClient(const ProcessSandboxClient&) = delete;
    ProcessSandboxClient& operator=(const ProcessSandboxClient&) = delete;

    ExecutionResult execute(const Table& table, std::string_view code) override;
    CodeSimilarity similarity(std::string_view code_a, std::string_view code_b) override;

private:
    struct Child;

    void ensure_started();
    void stop();
    std::optional<nlohmann::json> round_trip(const nlohmann::json& request,
                                             std::chrono::milliseconds deadline);

    std::string command_;
    std::chrono::milliseconds timeout_;
    std::unique_ptr<Child> child_;
    std::uint64_t next_id_ = 1;
    std::mutex mutex_;
};

/// Deterministic in-process stand-in for the runner. Results are looked up by
/// exact code text, then by the first rule whose `contains` substring occurs in
/// the code; unmatched code yields an Error. Identical code strings always get
/// similarity (1, 1); other pairs get `default_similarity`.
class ScriptedSandbox final : public SandboxClient {
public:
    struct Rule {
        std::string contains;
        ExecutionResult result;
    };

    ScriptedSandbox() = default;

    void add_exact(std::string code, ExecutionResult result);
    void add_rule(std::string contains, ExecutionResult result);
    void set_default_similarity(CodeSimilarity sim) { default_similarity_ = sim; }
    void set_available(bool available) { available_ = available; }

    /// Loads {"exact": {code: result}, "rules": [{"contains", "result"}],
    /// "similarity": {"ast", "opcode"}} where result is {"kind","payload"}.
    static std::unique_ptr<ScriptedSandbox> from_json(const nlohmann::json& spec);

    ExecutionResult execute(const Table& table, std::string_view code) override;
    CodeSimilarity similarity(std::string_view code_a, std::string_view code_b) override;

    int exec_calls() const;
    int similarity_calls() const;

private:
    std::map<std::string, ExecutionResult, std::less<>> exact_;
    std::vector<Rule> rules_;
    CodeSimilarity default_similarity_{};
    bool available_ = true;
    int exec_calls_ = 0;
    int similarity_calls_ = 0;
    mutable std::mutex mutex_;
};

}  // namespace tabagent
