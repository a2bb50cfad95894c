#include <gtest/gtest.h>

#include <thread>

#include "tabagent/errors.hpp"
#include "tabagent/llm_gateway.hpp"

using namespace tabagent;

TEST(CallLedger, CountsPerQuestionAndRole) {
    CallLedger ledger;
    ledger.record("q1", AgentRole::CoTA);
    ledger.record("q1", AgentRole::CoTA);
    ledger.record("q1", AgentRole::JA);
    ledger.record("q2", AgentRole::CoTA);
    EXPECT_EQ(ledger.count("q1", AgentRole::CoTA), 2);
    EXPECT_EQ(ledger.count("q2", AgentRole::JA), 0);
    EXPECT_EQ(ledger.counts_for("q1"), (std::map<AgentRole, int>{{AgentRole::CoTA, 2}, {AgentRole::JA, 1}}));
    EXPECT_EQ(ledger.totals().at(AgentRole::CoTA), 3);
    EXPECT_EQ(ledger.total(), 4);
}

TEST(CallLedger, ThreadSafe) {
    CallLedger ledger;
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 1000; ++i) ledger.record("q", AgentRole::PoTA);
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(ledger.count("q", AgentRole::PoTA), 4000);
}

TEST(ScriptedProvider, ResponsesAdvanceAndRepeatLast) {
    ScriptedProvider p;
    p.add_rule(AgentRole::CoTA, {"first", "second"}, "apples");
    p.add_rule(AgentRole::CoTA, {"hashed"}, std::nullopt, prompt_hash("exact prompt"));
    p.add_rule(AgentRole::CoTA, {"fallback"});
    auto ask = [&](AgentRole role, const std::string& prompt) {
        ChatRequest r;
        r.role = role;
        r.prompt = prompt;
        return p.complete(r);
    };
    EXPECT_EQ(ask(AgentRole::CoTA, "about apples"), "first");
    EXPECT_EQ(ask(AgentRole::CoTA, "about apples"), "second");
    EXPECT_EQ(ask(AgentRole::CoTA, "apples again"), "second");
    EXPECT_EQ(ask(AgentRole::CoTA, "exact prompt"), "hashed");
    EXPECT_EQ(ask(AgentRole::CoTA, "pears"), "fallback");
    EXPECT_THROW(ask(AgentRole::JA, "anything"), ProviderError);
}

TEST(ScriptedProvider, FailureResponses) {
    auto p = ScriptedProvider::from_json(nlohmann::json::parse(R"({"completions": [
        {"role": "JA", "response": "!timeout"},
        {"role": "PDA", "response": "!status:503"},
        {"role": "SDA", "response": "!unreachable"}]})"));
    ChatRequest r;
    r.role = AgentRole::JA;
    EXPECT_THROW(p->complete(r), ProviderTimeout);
    r.role = AgentRole::PDA;
    try {
        p->complete(r);
        FAIL() << "expected ProviderError";
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.status(), 503);
        EXPECT_EQ(e.role(), "PDA");
    }
    r.role = AgentRole::SDA;
    EXPECT_THROW(p->complete(r), ProviderUnreachable);
    EXPECT_THROW(ScriptedProvider::from_json(nlohmann::json::parse(R"({"completions": [{"role": "XX", "response": ""}]})")),
                 ConfigError);
}

TEST(LlmGateway, RoutesModelsAndCountsBeforeSending) {
    struct Recorder : ChatProvider {
        std::vector<ChatRequest> seen;
        std::string complete(const ChatRequest& r) override {
            seen.push_back(r);
            if (r.role == AgentRole::JA) throw ProviderUnreachable("JA", "down");
            return "ok";
        }
    };
    auto recorder = std::make_shared<Recorder>();
    GatewayConfig config;
    config.default_model = "big";
    config.models[AgentRole::FM] = "small";
    config.temperature = 0.2;
    LlmGateway gw(recorder, config);
    EXPECT_EQ(gw.complete(AgentRole::CoTA, "p", "q1"), "ok");
    EXPECT_EQ(gw.complete(AgentRole::FM, "p", "q1"), "ok");
    EXPECT_THROW(gw.complete(AgentRole::JA, "p", "q1"), ProviderUnreachable);
    ASSERT_EQ(recorder->seen.size(), 3u);
    EXPECT_EQ(recorder->seen[0].model, "big");
    EXPECT_EQ(recorder->seen[1].model, "small");
    EXPECT_DOUBLE_EQ(recorder->seen[0].temperature, 0.2);
    EXPECT_EQ(recorder->seen[0].question_id, "q1");
    // The failed call still counts.
    EXPECT_EQ(gw.ledger().count("q1", AgentRole::JA), 1);
    EXPECT_EQ(gw.ledger().total(), 3);

    LlmGateway none(nullptr);
    EXPECT_THROW(none.complete(AgentRole::CoTA, "p", "q"), ProviderUnreachable);
    EXPECT_EQ(none.ledger().total(), 1);
}

TEST(PromptHash, Fnv1a64) {
    EXPECT_EQ(prompt_hash(""), "cbf29ce484222325");
    EXPECT_EQ(prompt_hash("a"), "af63dc4c8601ec8c");
}

TEST(ExtractJson, PlainAndFenced) {
    auto f = extract_json(R"({"solution": "add", "answer": "-4"})", {"solution", "answer"});
    EXPECT_EQ(f.at("answer"), "-4");
    f = extract_json("Here you go:\n```json\n{\"code\": \"ans = 1\"}\n```\nDone.", {"code"});
    EXPECT_EQ(f.at("code"), "ans = 1");
}

TEST(ExtractJson, PythonishLiterals) {
    auto f = extract_json("{'solution': \"it's 84\", 'answer': 84}", {"solution", "answer"});
    EXPECT_EQ(f.at("solution"), "it's 84");
    EXPECT_EQ(f.at("answer"), "84");

    f = extract_json("{'code' : '''# mean\nmean_coins = df['Number of coins'].mean()\nans = mean_coins'''}", {"code"});
    EXPECT_EQ(f.at("code"), "# mean\nmean_coins = df['Number of coins'].mean()\nans = mean_coins");

    f = extract_json("{{'answer': 'x'}}", {"answer"});
    EXPECT_EQ(f.at("answer"), "x");

    f = extract_json("{answer: 1.50, extra: [1, 2], flag: true}", {"answer"});
    EXPECT_EQ(f.at("answer"), "1.50");
    EXPECT_EQ(f.at("extra"), "[1,2]");
}

TEST(ExtractJson, KeyLookupIsCaseInsensitiveFallback) {
    auto f = extract_json(R"({"Extracted_answer": "Gwen"})", {"Extracted_Answer"});
    EXPECT_EQ(f.at("Extracted_Answer"), "Gwen");
}

TEST(ExtractJson, Errors) {
    EXPECT_THROW(extract_json("no json here", {"answer"}), JsonNotFound);
    EXPECT_THROW(extract_json("{\"solution\": \"x\"}", {"answer"}), MissingKey);
    EXPECT_THROW(extract_json("{\"answer\": ", {"answer"}), JsonNotFound);
}

TEST(SplitUrl, SchemeHostAndPath) {
    EXPECT_EQ(split_url("http://localhost:8000/v1/chat/completions"),
              (std::pair<std::string, std::string>{"http://localhost:8000", "/v1/chat/completions"}));
    EXPECT_EQ(split_url("http://host"), (std::pair<std::string, std::string>{"http://host", "/"}));
}
