// One PASS/FAIL line per acceptance criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "oracles.hpp"
#include "support.hpp"
#include "tabagent/confidence.hpp"
#include "tabagent/debug_loop.hpp"
#include "tabagent/metrics.hpp"
#include "tabagent/pipeline.hpp"
#include "tabagent/scheduler.hpp"
#include "tabagent/similarity.hpp"
#include "tabagent/sql_engine.hpp"

using namespace tabagent;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::string show(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && budget_seconds > 0 && secs >= budget_seconds) {
        error = "took " + show(secs) + " s, budget " + show(budget_seconds) + " s";
    }
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.3f s", secs);
    if (error.empty()) {
        std::cout << "PASS  " << name << "  (" << timing << ")\n";
    } else {
        ++failures;
        std::cout << "FAIL  " << name << "  (" << timing << "): " << error << "\n";
    }
}

std::string random_text(std::mt19937& rng) {
    static const std::vector<std::string> words = {"John", "john", "Andy", "and", ",", "84", "84.0", "-4",
                                                   "the",  "The",  "a",    "red", "x", "1,200", "Paris", "paris."};
    std::uniform_int_distribution<int> n_words(0, 6), pick(0, static_cast<int>(words.size()) - 1), coin(0, 4),
        letter('a', 'e');
    std::string out;
    for (int i = n_words(rng); i > 0; --i) {
        out += coin(rng) == 0 ? "  " : " ";
        if (coin(rng) == 0) {
            for (int k = 1 + coin(rng); k > 0; --k) out += static_cast<char>(letter(rng));
        } else {
            out += words[pick(rng)];
        }
    }
    if (coin(rng) == 0) out += " ";
    return out;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Failure("cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(TABAGENT_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Runs the 20-question gate fixture through the CLI and returns report.json.
nlohmann::json gate_run(const std::string& name, const std::string& extra) {
    const fs::path fx = TABAGENT_FIXTURES;
    const auto out = fs::temp_directory_path() / ("tabagent_acceptance_" + name);
    fs::remove_all(out);
    const std::string args = "run --dataset " + (fx / "gate_dataset.json").string() +
                             " --provider scripted --script " + (fx / "gate_provider.json").string() +
                             " --sandbox scripted --sandbox-script " + (fx / "gate_sandbox.json").string() +
                             " --cc stub --stub-scores " + (fx / "gate_stub_scores.json").string() + " --out " +
                             out.string() + " " + extra;
    const int code = run_cli(args, fs::temp_directory_path() / ("tabagent_acceptance_" + name + ".log"));
    check(code == 0, "CLI exited with " + std::to_string(code));
    return nlohmann::json::parse(read_text(out / "report.json"));
}

// Cookies fixture wiring shared by the pipeline-level criteria.
struct CookiesPipeline {
    fixtures::Harness h;
    struct PotFirst : SchedulerBackend {
        std::string_view name() const override { return "fixed"; }
        PathScores score(const SchedulerFeatures&, const Question&, const std::string&) override { return {0.8, 0.3}; }
    } scheduler;
    StubBackend checker{{0.9, 0.9, 0.9}};

    explicit CookiesPipeline(const std::string& cot_answer) {
        const std::string pot = "ans = df.loc[2, 'Boxes of cookies'] - df.loc[1, 'Boxes of cookies']";
        h.provider->add_rule(AgentRole::CoTA, {fixtures::cot_reply(cot_answer)});
        h.provider->add_rule(AgentRole::PoTA, {fixtures::code_reply(pot)});
        h.provider->add_rule(AgentRole::PDA, {fixtures::code_reply(pot)});
        h.provider->add_rule(AgentRole::t2SA,
                             {fixtures::code_reply("SELECT (b.Boxes_of_cookies - a.Boxes_of_cookies) FROM dataframe a "
                                                   "JOIN dataframe b ON a.Day = 'Wednesday' AND b.Day = 'Thursday'")});
        h.sandbox.add_exact(pot, ExecutionResult::value("-4"));
    }

    PipelineResult run() {
        Pipeline p(*h.gateway, &h.sandbox, scheduler, checker);
        return p.answer(fixtures::cookies(), fixtures::cookies_question());
    }
};

}  // namespace

int main() {
    criterion("metric anchors", 1.0, [] {
        const double fuzzy = metrics::fuzzy_ratio("John , Andy", "John and Andy");
        check(fuzzy == 0.83, "fuzzy = " + show(fuzzy));
        const double ratio = similarity::sequence_match_ratio("John , Andy", "John and Andy");
        check(std::fabs(ratio - 0.8333) <= 1e-4, "sequence_match_ratio = " + show(ratio));
        const double f1 = metrics::token_f1("John , Andy", "John and Andy");
        check(std::fabs(f1 - 2.0 / 3.0) <= 1e-9, "token_f1 = " + show(f1));
    });

    criterion("metric oracle equivalence (500 pairs)", 10.0, [] {
        std::mt19937 rng(20240501);
        for (int i = 0; i < 500; ++i) {
            const auto a = random_text(rng);
            const auto b = random_text(rng);
            const double f1 = metrics::token_f1(a, b);
            check(std::fabs(f1 - oracle::token_f1(a, b)) <= 1e-9, "token_f1 differs on '" + a + "' / '" + b + "'");
            const double fz = metrics::fuzzy_ratio(a, b);
            check(fz == oracle::fuzzy(a, b), "fuzzy differs on '" + a + "' / '" + b + "': " + show(fz));
        }
    });

    criterion("skip behavior", 0, [] {
        CookiesPipeline agree("-4");
        auto r = agree.run();
        check(r.record.skipped_path == Path::Text2SQL, "Text2SQL not skipped on agreement");
        check(agree.h.calls("cookies", AgentRole::t2SA) == 0, "t2SA called on agreement");
        check(agree.h.calls("cookies", AgentRole::SDA) == 0, "SDA called on agreement");

        CookiesPipeline disagree("4");
        r = disagree.run();
        check(!r.record.skipped_path, "a path was skipped on disagreement");
        for (Path p : {Path::CoT, Path::PoT, Path::Text2SQL}) {
            check(!r.example.is_nothing(p), std::string(to_string(p)) + " missing from serialized example");
        }
        check(disagree.h.calls("cookies", AgentRole::t2SA) == 1, "t2SA not called on disagreement");
    });

    criterion("loop bounds and stop rules", 0, [] {
        const Question q{"What is the mean?", "q", std::nullopt};
        const Table table = fixtures::coins();
        const SqlEnvironment sql(table);

        {
            fixtures::Harness h;
            const std::string code = "ans = df['Number of coins'].mean()";
            h.provider->add_rule(AgentRole::PoTA, {fixtures::code_reply(code)});
            h.provider->add_rule(AgentRole::PDA, {fixtures::code_reply(code)});
            h.sandbox.add_exact(code, ExecutionResult::value("84"));
            Agents agents(*h.gateway);
            auto t = code_and_debug(Path::PoT, agents, table, q, {}, {&h.sandbox, &sql});
            check(t.debug_rounds() == 1, "identical PoT debug ran " + std::to_string(t.debug_rounds()) + " rounds");
        }
        {
            fixtures::Harness h;
            h.provider->add_rule(AgentRole::t2SA, {fixtures::code_reply("SELECT AVG(Number_of_coins) FROM dataframe")});
            Agents agents(*h.gateway);
            auto t = code_and_debug(Path::Text2SQL, agents, table, q, {}, {&h.sandbox, &sql});
            check(t.debug_rounds() == 0, "successful SQL ran " + std::to_string(t.debug_rounds()) + " debug rounds");
            check(h.calls("q", AgentRole::SDA) == 0, "SDA called after successful SQL");
        }
        {
            // Every round changes the code and the result, so no stop rule fires.
            fixtures::Harness h;
            std::vector<std::string> pot, sqls;
            for (int i = 0; i < 12; ++i) {
                pot.push_back(fixtures::code_reply("v" + std::to_string(i) + " = " + std::string(i * 11, 'q') +
                                                   "\nans = " + std::to_string(i)));
                sqls.push_back(fixtures::code_reply("SELECT no_such_column_" + std::to_string(i) + " FROM dataframe"));
                h.sandbox.add_rule("ans = " + std::to_string(i), ExecutionResult::value(std::to_string(i)));
            }
            h.provider->add_rule(AgentRole::PoTA, {pot[0]});
            h.provider->add_rule(AgentRole::PDA, std::vector<std::string>(pot.begin() + 1, pot.end()));
            h.provider->add_rule(AgentRole::t2SA, {sqls[0]});
            h.provider->add_rule(AgentRole::SDA, std::vector<std::string>(sqls.begin() + 1, sqls.end()));
            h.sandbox.set_default_similarity({0.0, 0.0});
            Agents agents(*h.gateway);
            LoopConfig loop;
            loop.max_debug_rounds = 3;
            for (Path p : {Path::PoT, Path::Text2SQL}) {
                auto t = code_and_debug(p, agents, table, q, loop, {&h.sandbox, &sql});
                check(t.iterations.size() <= 4, std::string(to_string(p)) + " ran " +
                                                    std::to_string(t.iterations.size()) + " iterations with N=3");
            }
        }
    });

    criterion("gate accounting (20 questions)", 30.0, [] {
        const auto with_cc = gate_run("gate_cc", "");
        check(with_cc.at("n_questions") == 20, "expected 20 questions");
        check(with_cc.at("calls").at("JA") == 0, "JA calls with CC: " + with_cc.at("calls").at("JA").dump());
        const auto without_cc = gate_run("gate_nocc", "--no-cc");
        check(without_cc.at("calls").at("JA") == 20, "JA calls without CC: " + without_cc.at("calls").at("JA").dump());
    });

    criterion("<NOTHING> rules", 0, [] {
        const Table table = fixtures::cookies();
        const Question q = fixtures::cookies_question();
        ReasoningTrace cot{Path::CoT, {}, std::string("27 - 23"), std::string("-4")};
        ReasoningTrace sql{Path::Text2SQL, {{"SELECT 23 - 27", ExecutionResult::value("[[-4]]")}}, {}, {}};
        CandidateSet c;
        c.cot = trace_candidate(cot);
        c.sql = trace_candidate(sql);
        c.skipped = Path::PoT;
        auto ex = serialize_example(table, q, {cot, sql}, c);
        check(ex.text.find("<PoT>\n<N=0_code><NOTHING></N=0_code>\n"
                           "<N=0_execution_result><NOTHING></N=0_execution_result>\n</PoT>") != std::string::npos,
              "skipped PoT block not filled with <NOTHING>");
        StubBackend high({0.9, 0.9, 0.9});
        auto s = score(ex, q.id, high);
        check(s.pot == 0.0, "skipped path scored " + show(s.pot));
        check(s.cot == 0.9 && s.sql == 0.9, "live paths lost their scores");

        const std::string frame = "<N=0_code></N=0_code>\n<N=0_execution_result>[[-4]]</N=0_execution_result>\n";
        for (std::size_t body : {kMaxPathBody, kMaxPathBody + 1}) {
            ReasoningTrace long_sql{Path::Text2SQL,
                                    {{std::string(body - frame.size(), 'x'), ExecutionResult::value("[[-4]]")}}, {}, {}};
            CandidateSet lc = c;
            lc.sql = trace_candidate(long_sql);
            auto lex = serialize_example(table, q, {cot, long_sql}, lc);
            const bool voided = body > kMaxPathBody;
            check(lex.is_nothing(Path::Text2SQL) == voided,
                  "body of " + std::to_string(body) + " chars " + (voided ? "kept" : "voided"));
            check(lex.candidates.sql.is_nothing() == voided, "candidate not voided with its block");
            check((score(lex, q.id, high).sql == 0.0) == voided, "voided path kept a score");
        }
    });

    criterion("soft-label law (200 pairs)", 0, [] {
        std::mt19937 rng(99);
        for (int i = 0; i < 200; ++i) {
            const auto pred = random_text(rng);
            const auto gold = i % 5 == 0 ? " " + pred + " " : random_text(rng);
            const double label = soft_label(pred, gold);
            const bool em = oracle::em(pred, gold) == 1;
            check((label == 1.0) == em, "label " + show(label) + " vs EM " + std::to_string(em) + " on '" + pred +
                                            "' / '" + gold + "'");
            if (!em) {
                check(std::fabs(label - oracle::token_f1(pred, gold)) <= 1e-9,
                      "label is not token F1 on '" + pred + "' / '" + gold + "'");
            }
        }
    });

    criterion("determinism", 0, [] {
        const fs::path a = fs::temp_directory_path() / "tabagent_acceptance_det1" / "report.json";
        const fs::path b = fs::temp_directory_path() / "tabagent_acceptance_det2" / "report.json";
        gate_run("det1", "");
        gate_run("det2", "");
        check(read_text(a) == read_text(b), "reports differ between consecutive runs");
        gate_run("det4", "--jobs 4");
        check(read_text(a) == read_text(fs::temp_directory_path() / "tabagent_acceptance_det4" / "report.json"),
              "report differs with --jobs 4");
    });

    criterion("scheduler features", 0, [] {
        const Table table = fixtures::cookies();
        const Question q = fixtures::cookies_question();
        const auto f = extract_features(table, q);
        check(f.n_rows == 5 && f.n_cols == 2 && f.table_size == 10,
              "size features (" + std::to_string(f.n_rows) + ", " + std::to_string(f.n_cols) + ", " +
                  std::to_string(f.table_size) + ")");
        std::mt19937 rng(5);
        auto rows = table.rows();
        for (int i = 0; i < 100; ++i) {
            std::shuffle(rows.begin(), rows.end(), rng);
            check(extract_features(Table(table.columns(), rows), q) == f, "features changed under permutation");
        }
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
