#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "support.hpp"
#include "tabagent/confidence.hpp"
#include "tabagent/errors.hpp"
#include "tabagent/http_json.hpp"
#include "tabagent/llm_gateway.hpp"
#include "tabagent/scheduler.hpp"

using namespace tabagent;
using nlohmann::json;

namespace {

// A loopback server on an ephemeral port, stopped on destruction.
class LocalServer {
public:
    LocalServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

ChatRequest request(AgentRole role, const std::string& prompt) {
    ChatRequest r;
    r.role = role;
    r.prompt = prompt;
    r.model = "m";
    r.temperature = 0.0;
    r.max_tokens = 64;
    return r;
}

}  // namespace

TEST(HttpChatProvider, PostsOpenAiStyleBody) {
    LocalServer srv;
    json seen;
    std::string auth;
    srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(json{{"choices", {{{"message", {{"content", "{\"answer\": \"4\"}"}}}}}}}.dump(),
                        "application/json");
    });
    HttpChatProvider provider({srv.url("/v1/chat/completions"), "secret", std::chrono::seconds(5)});
    EXPECT_EQ(provider.complete(request(AgentRole::CoTA, "hello")), "{\"answer\": \"4\"}");
    EXPECT_EQ(seen["model"], "m");
    EXPECT_EQ(seen["messages"][0]["role"], "user");
    EXPECT_EQ(seen["messages"][0]["content"], "hello");
    EXPECT_EQ(seen["max_tokens"], 64);
    EXPECT_EQ(auth, "Bearer secret");
}

TEST(HttpChatProvider, ErrorMapping) {
    LocalServer srv;
    srv.server().Post("/busy", [](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    srv.server().Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "text/plain");
    });
    srv.server().Post("/shape", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"choices\": []}", "application/json");
    });
    srv.server().Post("/slow", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2500));
        res.set_content("{}", "application/json");
    });

    try {
        HttpChatProvider({srv.url("/busy"), "", std::chrono::seconds(5)}).complete(request(AgentRole::JA, "x"));
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.status(), 503);
        EXPECT_EQ(e.role(), "JA");
    }
    EXPECT_THROW(HttpChatProvider({srv.url("/garbage"), "", std::chrono::seconds(5)}).complete(request(AgentRole::JA, "x")),
                 ProviderError);
    EXPECT_THROW(HttpChatProvider({srv.url("/shape"), "", std::chrono::seconds(5)}).complete(request(AgentRole::JA, "x")),
                 ProviderError);
    EXPECT_THROW(HttpChatProvider({srv.url("/slow"), "", std::chrono::seconds(1)}).complete(request(AgentRole::JA, "x")),
                 ProviderTimeout);
    EXPECT_THROW(HttpChatProvider({"http://127.0.0.1:1/none", "", std::chrono::seconds(1)}).complete(request(AgentRole::JA, "x")),
                 ProviderUnreachable);
    EXPECT_THROW(HttpChatProvider({"", "", std::chrono::seconds(1)}), ConfigError);
}

TEST(HttpJsonTransport, RoundTripAndFailures) {
    LocalServer srv;
    srv.server().Post("/echo", [](const httplib::Request& req, httplib::Response& res) {
        res.set_content(req.body, "application/json");
    });
    srv.server().Post("/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    auto transport = http_json_transport(std::chrono::seconds(2));
    EXPECT_EQ(transport(srv.url("/echo"), json{{"a", 1}}), (json{{"a", 1}}));
    EXPECT_THROW(transport(srv.url("/fail"), json::object()), std::runtime_error);
    EXPECT_THROW(transport("http://127.0.0.1:1/x", json::object()), std::runtime_error);
}

TEST(RemoteScorers, SchedulerAndCheckerOverHttp) {
    LocalServer srv;
    json sched_body, cc_body;
    srv.server().Post("/sch", [&](const httplib::Request& req, httplib::Response& res) {
        sched_body = json::parse(req.body);
        res.set_content(R"({"prob_pot": 0.2, "prob_sql": 0.7})", "application/json");
    });
    srv.server().Post("/cc", [&](const httplib::Request& req, httplib::Response& res) {
        cc_body = json::parse(req.body);
        res.set_content(R"({"scores": [0.1, 0.8, 0.3]})", "application/json");
    });
    const auto table = fixtures::cookies();
    const auto question = fixtures::cookies_question();

    RemoteScheduler scheduler(srv.url("/sch"), http_json_transport(std::chrono::seconds(2)));
    bool fell_back = true;
    auto ps = score_paths(extract_features(table, question), question, schema_text(table), scheduler, &fell_back);
    EXPECT_FALSE(fell_back);
    EXPECT_DOUBLE_EQ(ps.prob_pot, 0.2);
    EXPECT_DOUBLE_EQ(ps.prob_sql, 0.7);
    EXPECT_EQ(sched_body["features"]["n_rows"], 5);
    EXPECT_EQ(sched_body["question"], question.text);
    EXPECT_EQ(sched_body["schema"], "Day | Boxes of cookies");

    RemoteConfidenceBackend checker(srv.url("/cc"), http_json_transport(std::chrono::seconds(2)));
    CandidateSet c;
    c.cot.value = "-4";
    c.pot.value = "4";
    c.sql.value = "-4";
    ReasoningTrace pot{Path::PoT, {{"ans = 4", ExecutionResult::value("4")}}, std::nullopt, std::nullopt};
    ReasoningTrace sql{Path::Text2SQL, {{"SELECT -4", ExecutionResult::value("[[-4]]")}}, std::nullopt, std::nullopt};
    ReasoningTrace cot{Path::CoT, {}, std::string("s"), std::string("-4")};
    auto example = serialize_example(table, question, {cot, pot, sql}, c);
    auto scores = score(example, "cookies", checker, &fell_back);
    EXPECT_FALSE(fell_back);
    EXPECT_DOUBLE_EQ(scores.pot, 0.8);
    EXPECT_EQ(cc_body["text"], example.text);
}

TEST(RemoteScorers, FallBackToHeuristicWhenUnreachable) {
    const auto table = fixtures::cookies();
    const auto question = fixtures::cookies_question();
    RemoteScheduler scheduler("http://127.0.0.1:1/sch", http_json_transport(std::chrono::seconds(1)));
    bool fell_back = false;
    HeuristicScheduler heuristic;
    const auto features = extract_features(table, question);
    auto ps = score_paths(features, question, schema_text(table), scheduler, &fell_back);
    auto expected = heuristic.score(features, question, schema_text(table));
    EXPECT_TRUE(fell_back);
    EXPECT_DOUBLE_EQ(ps.prob_pot, expected.prob_pot);
    EXPECT_DOUBLE_EQ(ps.prob_sql, expected.prob_sql);
}
