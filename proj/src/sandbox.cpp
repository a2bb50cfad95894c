#include "tabagent/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tabagent/column_types.hpp"
#include "tabagent/errors.hpp"

namespace tabagent {

using nlohmann::json;

namespace sandbox_protocol {

json typed_rows(const Table& table) {
    const auto types = infer_column_types(table);
    json rows = json::array();
    for (const auto& row : table.rows()) {
        json out = json::array();
        for (std::size_t c = 0; c < row.size(); ++c) {
            const Cell& cell = row[c];
            if (!cell || (types[c] == ColumnType::Text && cell->empty())) {
                out.push_back(nullptr);
                continue;
            }
            if (types[c] == ColumnType::Text) {
                out.push_back(*cell);
                continue;
            }
            auto numeric = numeric_text(*cell);
            if (!numeric) {
                out.push_back(nullptr);  // nan-like marker in a numeric column
            } else if (types[c] == ColumnType::Integer) {
                try {
                    out.push_back(std::stoll(*numeric));
                } catch (const std::out_of_range&) {
                    out.push_back(std::stod(*numeric));
                }
            } else {
                out.push_back(std::stod(*numeric));
            }
        }
        rows.push_back(std::move(out));
    }
    return rows;
}

json exec_request(std::uint64_t id, const Table& table, std::string_view code,
                  std::chrono::milliseconds timeout) {
    return json{{"protocol", kVersion},
                {"id", id},
                {"kind", "exec"},
                {"columns", table.columns()},
                {"rows", typed_rows(table)},
                {"code", std::string(code)},
                {"timeout_ms", timeout.count()}};
}

json similarity_request(std::uint64_t id, std::string_view code_a, std::string_view code_b) {
    return json{{"protocol", kVersion},
                {"id", id},
                {"kind", "similarity"},
                {"code_a", std::string(code_a)},
                {"code_b", std::string(code_b)}};
}

ExecutionResult decode_exec_response(const json& response) {
    const std::string kind = response.value("kind", "");
    if (kind == "value") {
        const auto& payload = response.at("payload");
        return ExecutionResult::value(payload.is_string() ? payload.get<std::string>() : payload.dump());
    }
    if (kind == "timeout") return ExecutionResult::timeout();
    if (kind == "error") {
        std::string type = response.value("type", "Error");
        std::string message = response.value("message", "");
        return ExecutionResult::error(message.empty() ? type : type + ": " + message);
    }
    return ExecutionResult::error("ProtocolError: unexpected response kind '" + kind + "'");
}

CodeSimilarity decode_similarity_response(const json& response) {
    if (response.value("kind", "") != "sim") {
        throw SandboxUnavailable("unexpected similarity response: " + response.dump());
    }
    auto component = [&](const char* key) -> std::optional<double> {
        if (!response.contains(key) || response.at(key).is_null()) return std::nullopt;
        return response.at(key).get<double>();
    };
    return {component("ast"), component("opcode")};
}

}  // namespace sandbox_protocol

// ---------------------------------------------------------------------------

struct ProcessSandboxClient::Child {
    pid_t pid = -1;
    int fd = -1;
    std::string buffer;

    ~Child() {
        if (fd >= 0) ::close(fd);
        if (pid > 0) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
        }
    }

    bool send_line(const std::string& line) {
        std::string data = line + "\n";
        std::size_t sent = 0;
        while (sent < data.size()) {
            ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            sent += static_cast<std::size_t>(n);
        }
        return true;
    }

    enum class ReadStatus { Line, Eof, Timeout };

    ReadStatus read_line(std::string& line, std::chrono::steady_clock::time_point deadline) {
        for (;;) {
            auto newline = buffer.find('\n');
            if (newline != std::string::npos) {
                line = buffer.substr(0, newline);
                buffer.erase(0, newline + 1);
                return ReadStatus::Line;
            }
            auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (remaining.count() <= 0) return ReadStatus::Timeout;
            pollfd p{fd, POLLIN, 0};
            int ready = ::poll(&p, 1, static_cast<int>(remaining.count()));
            if (ready < 0) {
                if (errno == EINTR) continue;
                return ReadStatus::Eof;
            }
            if (ready == 0) return ReadStatus::Timeout;
            char chunk[4096];
            ssize_t n = ::read(fd, chunk, sizeof(chunk));
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) return ReadStatus::Eof;
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

ProcessSandboxClient::ProcessSandboxClient(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {}

ProcessSandboxClient::~ProcessSandboxClient() = default;

void ProcessSandboxClient::stop() { child_.reset(); }

void ProcessSandboxClient::ensure_started() {
    if (child_) return;
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
        throw SandboxUnavailable(std::string("socketpair: ") + std::strerror(errno));
    }
    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw SandboxUnavailable(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    auto child = std::make_unique<Child>();
    child->pid = pid;
    child->fd = fds[0];

    std::string hello;
    auto status = child->read_line(hello, std::chrono::steady_clock::now() + std::chrono::seconds(15));
    if (status != Child::ReadStatus::Line) {
        throw SandboxUnavailable("sandbox runner did not send a handshake: " + command_);
    }
    json parsed = json::parse(hello, nullptr, false);
    if (parsed.is_discarded() || parsed.value("kind", "") != "hello") {
        throw SandboxUnavailable("bad sandbox handshake: " + hello);
    }
    if (parsed.value("protocol", -1) != sandbox_protocol::kVersion) {
        throw SandboxUnavailable("sandbox protocol mismatch: " + hello);
    }
    child_ = std::move(child);
}

std::optional<json> ProcessSandboxClient::round_trip(const json& request,
                                                     std::chrono::milliseconds deadline) {
    ensure_started();
    if (!child_->send_line(request.dump())) {
        stop();
        throw SandboxUnavailable("sandbox runner closed its input");
    }
    const auto until = std::chrono::steady_clock::now() + deadline;
    const auto id = request.at("id").get<std::uint64_t>();
    for (;;) {
        std::string line;
        auto status = child_->read_line(line, until);
        if (status == Child::ReadStatus::Timeout) {
            stop();
            return std::nullopt;
        }
        if (status == Child::ReadStatus::Eof) {
            stop();
            throw SandboxUnavailable("sandbox runner exited");
        }
        json response = json::parse(line, nullptr, false);
        if (response.is_discarded()) {
            stop();
            throw SandboxUnavailable("unparseable sandbox response: " + line);
        }
        // Stale responses from an earlier request are skipped.
        if (response.value("id", std::uint64_t{0}) == id) return response;
    }
}

ExecutionResult ProcessSandboxClient::execute(const Table& table, std::string_view code) {
    std::lock_guard lock(mutex_);
    try {
        auto request = sandbox_protocol::exec_request(next_id_++, table, code, timeout_);
        // The runner enforces the timeout itself; the grace period covers startup.
        auto response = round_trip(request, timeout_ + std::chrono::seconds(2));
        if (!response) return ExecutionResult::timeout();
        return sandbox_protocol::decode_exec_response(*response);
    } catch (const SandboxUnavailable& e) {
        return ExecutionResult::error(std::string("SandboxUnavailable: ") + e.what());
    }
}

CodeSimilarity ProcessSandboxClient::similarity(std::string_view code_a, std::string_view code_b) {
    std::lock_guard lock(mutex_);
    auto request = sandbox_protocol::similarity_request(next_id_++, code_a, code_b);
    auto response = round_trip(request, timeout_ + std::chrono::seconds(2));
    if (!response) throw SandboxUnavailable("similarity request timed out");
    return sandbox_protocol::decode_similarity_response(*response);
}

// ---------------------------------------------------------------------------

namespace {

ExecutionResult result_from_json(const json& j) {
    const std::string kind = j.value("kind", "value");
    std::string payload = j.contains("payload")
                              ? (j["payload"].is_string() ? j["payload"].get<std::string>()
                                                          : j["payload"].dump())
                              : std::string{};
    if (kind == "value") return ExecutionResult::value(std::move(payload));
    if (kind == "timeout") return ExecutionResult::timeout(payload.empty() ? "Timeout" : payload);
    return ExecutionResult::error(std::move(payload));
}

}  // namespace

void ScriptedSandbox::add_exact(std::string code, ExecutionResult result) {
    exact_.insert_or_assign(std::move(code), std::move(result));
}

void ScriptedSandbox::add_rule(std::string contains, ExecutionResult result) {
    rules_.push_back({std::move(contains), std::move(result)});
}

std::unique_ptr<ScriptedSandbox> ScriptedSandbox::from_json(const json& spec) {
    auto owned = std::make_unique<ScriptedSandbox>();
    auto& sandbox = *owned;
    if (spec.contains("exact")) {
        for (const auto& [code, result] : spec["exact"].items()) {
            sandbox.add_exact(code, result_from_json(result));
        }
    }
    if (spec.contains("rules")) {
        for (const auto& rule : spec["rules"]) {
            sandbox.add_rule(rule.at("contains").get<std::string>(), result_from_json(rule.at("result")));
        }
    }
    if (spec.contains("similarity")) {
        const auto& sim = spec["similarity"];
        CodeSimilarity s;
        if (sim.contains("ast") && !sim["ast"].is_null()) s.ast = sim["ast"].get<double>();
        if (sim.contains("opcode") && !sim["opcode"].is_null()) s.opcode = sim["opcode"].get<double>();
        sandbox.set_default_similarity(s);
    }
    return owned;
}

ExecutionResult ScriptedSandbox::execute(const Table&, std::string_view code) {
    std::lock_guard lock(mutex_);
    ++exec_calls_;
    if (!available_) return ExecutionResult::error("SandboxUnavailable: scripted sandbox disabled");
    if (auto it = exact_.find(code); it != exact_.end()) return it->second;
    for (const auto& rule : rules_) {
        if (code.find(rule.contains) != std::string_view::npos) return rule.result;
    }
    return ExecutionResult::error("NameError: no scripted result for code");
}

CodeSimilarity ScriptedSandbox::similarity(std::string_view code_a, std::string_view code_b) {
    std::lock_guard lock(mutex_);
    ++similarity_calls_;
    if (!available_) throw SandboxUnavailable("scripted sandbox disabled");
    if (code_a == code_b) return {1.0, 1.0};
    return default_similarity_;
}

int ScriptedSandbox::exec_calls() const {
    std::lock_guard lock(mutex_);
    return exec_calls_;
}

int ScriptedSandbox::similarity_calls() const {
    std::lock_guard lock(mutex_);
    return similarity_calls_;
}

}  // namespace tabagent
