#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabagent/llm_gateway.hpp"
#include "tabagent/sandbox.hpp"
#include "tabagent/table.hpp"

namespace fixtures {

using namespace tabagent;

inline Table cookies() {
    return Table({"Day", "Boxes of cookies"},
                 {{"Tuesday", "25"}, {"Wednesday", "27"}, {"Thursday", "23"}, {"Friday", "26"}, {"Saturday", "23"}});
}

inline Question cookies_question() {
    return {"A Girl Scout troop recorded how many boxes of cookies they sold each day for a week. According to "
            "the table, what was the rate of change between Wednesday and Thursday?",
            "cookies", std::nullopt};
}

inline Table coins() {
    return Table({"Name", "Number of coins"}, {{"Braden", "76"},
                                                {"Camilla", "94"},
                                                {"Rick", "86"},
                                                {"Mary", "84"},
                                                {"Hector", "80"},
                                                {"Devin", "83"},
                                                {"Emily", "82"},
                                                {"Avery", "87"}});
}

inline Table market() {
    return Table({"Item", "Price", "Discount"}, {{"apples", "$1.50", "10%"},
                                                  {"pears", "$2.25", std::nullopt},
                                                  {"figs", "$12,000.00", "nan"}});
}

inline std::string j(const nlohmann::json& v) { return v.dump(); }
inline std::string code_reply(const std::string& code) { return j({{"code", code}}); }
inline std::string cot_reply(const std::string& answer) {
    return j({{"solution", "Worked it out."}, {"answer", answer}});
}
inline std::string judge_reply(const std::string& answer) { return j({{"answer", answer}}); }

struct Harness {
    std::shared_ptr<ScriptedProvider> provider = std::make_shared<ScriptedProvider>();
    std::unique_ptr<LlmGateway> gateway = std::make_unique<LlmGateway>(provider);
    ScriptedSandbox sandbox;

    int calls(const std::string& qid, AgentRole role) const { return gateway->ledger().count(qid, role); }
};

}  // namespace fixtures
