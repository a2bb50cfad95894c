#include "tabagent/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>

#include "tabagent/debug_loop.hpp"
#include "tabagent/errors.hpp"
#include "tabagent/metrics.hpp"

namespace tabagent {

namespace {

constexpr std::array<Path, 3> kPaths = {Path::CoT, Path::PoT, Path::Text2SQL};

std::string_view block_tag(Path p) {
    switch (p) {
        case Path::CoT: return "CoT";
        case Path::PoT: return "PoT";
        case Path::Text2SQL: return "text2sql";
    }
    return "";
}

std::string tagged(std::string_view tag, std::string_view body) {
    return "<" + std::string(tag) + ">" + std::string(body) + "</" + std::string(tag) + ">";
}

std::string slot_tag(std::size_t k, std::string_view what) {
    return "N=" + std::to_string(k) + "_" + std::string(what);
}

std::string result_slot(const ExecutionResult& r) {
    if (r.kind == ExecutionResult::Kind::Timeout) return r.payload.empty() ? "Timeout" : r.payload;
    return r.payload;
}

std::string code_body(const ReasoningTrace& trace) {
    std::string body;
    for (std::size_t k = 0; k < trace.iterations.size(); ++k) {
        body += tagged(slot_tag(k, "code"), trace.iterations[k].code) + "\n";
        body += tagged(slot_tag(k, "execution_result"), result_slot(trace.iterations[k].result)) + "\n";
    }
    return body;
}

std::string nothing_body(Path p) {
    const std::string n(kNothingToken);
    if (p == Path::CoT) return tagged("solution", n) + "\n" + tagged("answer", n) + "\n";
    return tagged(slot_tag(0, "code"), n) + "\n" + tagged(slot_tag(0, "execution_result"), n) + "\n";
}

const ReasoningTrace* find_trace(const std::vector<ReasoningTrace>& traces, Path p) {
    for (const auto& t : traces) {
        if (t.path == p) return &t;
    }
    return nullptr;
}

// Text between "<tag>\n" and "</tag>" starting the search at `from`.
std::optional<std::string_view> block(std::string_view text, std::string_view tag, std::size_t from) {
    const std::string open = "<" + std::string(tag) + ">\n";
    const std::string close = "</" + std::string(tag) + ">";
    const auto b = text.find(open, from);
    if (b == std::string_view::npos) return std::nullopt;
    const auto start = b + open.size();
    const auto e = text.find(close, start);
    if (e == std::string_view::npos) return std::nullopt;
    return text.substr(start, e - start);
}

// Content of the last "<prefix...suffix>" element in a block.
std::optional<std::string> last_slot(std::string_view body, std::string_view suffix) {
    std::optional<std::string> found;
    std::size_t pos = 0;
    for (;;) {
        const auto open = body.find("<N=", pos);
        if (open == std::string_view::npos) break;
        const auto gt = body.find('>', open);
        if (gt == std::string_view::npos) break;
        const std::string_view name = body.substr(open + 1, gt - open - 1);
        pos = gt + 1;
        if (name.size() < suffix.size() || name.substr(name.size() - suffix.size()) != suffix) continue;
        const std::string close = "</" + std::string(name) + ">";
        const auto end = body.find(close, pos);
        if (end == std::string_view::npos) break;
        found = std::string(body.substr(pos, end - pos));
        pos = end + close.size();
    }
    return found;
}

// The serialized text keeps only payloads, so failed executions are recognized
// by the prefixes the sandbox, SQL engine and debug loop write.
bool failure_payload(const std::string& payload) {
    static const std::regex re(
        R"(^(Timeout|Rejected|AgentFailed|SandboxUnavailable|ProtocolError|Error(\((syntax|runtime)\))?|)"
        R"([A-Za-z_][A-Za-z0-9_.]*(Error|Exception|Interrupt|Exit))(:.*)?$)",
        std::regex::extended);
    return std::regex_match(payload, re);
}

ConfidenceVector from_array(const nlohmann::json& arr) {
    if (!arr.is_array() || arr.size() != 3) throw ConfigError("scores must be a 3-element array [cot, pot, sql]");
    return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

double clamp01(double x) { return std::isnan(x) ? 0.0 : std::clamp(x, 0.0, 1.0); }

}  // namespace

SerializedExample serialize_example(const Table& table, const Question& question,
                                    const std::vector<ReasoningTrace>& traces, const CandidateSet& candidates,
                                    const SerializeOptions& options) {
    SerializedExample ex;
    ex.candidates = candidates;

    std::string& out = ex.text;
    out += tagged("Table_row_size", std::to_string(table.row_count())) + "\n";
    out += tagged("Table_column_size", std::to_string(table.column_count())) + "\n";
    out += tagged("Table_size", std::to_string(table.row_count() * table.column_count())) + "\n";

    const Table* shown = &table;
    Table window;
    if (options.max_table_rows > 0 && table.row_count() > options.max_table_rows) {
        std::vector<Row> rows(table.rows().begin(),
                              table.rows().begin() + static_cast<std::ptrdiff_t>(options.max_table_rows));
        window = Table(table.columns(), std::move(rows), table.name());
        shown = &window;
        ex.table_truncated = true;
    }
    out += "<Table>\n" + table_to_markdown(*shown) + "\n</Table>\n";
    out += tagged("Question", question.text) + "\n";

    // Blocks appear in the fixed order PoT, text2sql, CoT.
    for (Path p : {Path::PoT, Path::Text2SQL, Path::CoT}) {
        const ReasoningTrace* trace = find_trace(traces, p);
        const bool skipped = candidates.skipped == p || trace == nullptr;
        std::string body;
        if (!skipped) {
            if (p == Path::CoT) {
                const bool failed = !trace->solution_text && !trace->cot_answer;
                if (!failed) {
                    body = tagged("solution", trace->solution_text.value_or("")) + "\n" +
                           tagged("answer", trace->cot_answer.value_or(std::string(kNothingToken))) + "\n";
                }
            } else if (!trace->iterations.empty()) {
                body = code_body(*trace);
            }
        }
        const bool nothing = body.empty() || body.size() > kMaxPathBody;
        if (nothing) {
            body = nothing_body(p);
            ex.nothing[static_cast<std::size_t>(p)] = true;
            ex.candidates.at(p) = AnswerCandidate::nothing(p);
        }
        out += "<" + std::string(block_tag(p)) + ">\n" + body + "</" + std::string(block_tag(p)) + ">";
        if (p != Path::CoT) out += "\n";
    }
    return ex;
}

CandidateSet parse_candidates(std::string_view text) {
    CandidateSet out;
    auto q = text.find("</Question>");
    std::size_t from = q == std::string_view::npos ? 0 : q;
    for (Path p : {Path::PoT, Path::Text2SQL, Path::CoT}) {
        auto body = block(text, block_tag(p), from);
        if (!body) continue;
        from = static_cast<std::size_t>(body->data() - text.data()) + body->size();
        if (p == Path::CoT) {
            const auto a = body->find("<answer>");
            const auto e = body->rfind("</answer>");
            if (a == std::string_view::npos || e == std::string_view::npos || e < a) continue;
            std::string value(body->substr(a + 8, e - a - 8));
            if (value != kNothingToken) out.cot = {Path::CoT, value, value};
            continue;
        }
        auto result = last_slot(*body, "_execution_result");
        if (!result || *result == kNothingToken) continue;
        ReasoningTrace trace;
        trace.path = p;
        trace.iterations.push_back(
            {"", failure_payload(*result) ? ExecutionResult::error(*result) : ExecutionResult::value(*result)});
        out.at(p) = trace_candidate(trace);
    }
    return out;
}

ConfidenceVector AgreementBackend::score(const SerializedExample& example, const std::string&) {
    ConfidenceVector v;
    const auto& c = example.candidates;
    for (Path p : kPaths) {
        const auto& self = c.at(p);
        if (self.is_nothing()) continue;
        int others = 0;
        int agree = 0;
        for (Path o : kPaths) {
            if (o == p || c.at(o).is_nothing()) continue;
            ++others;
            agree += metrics::exact_match(*self.value, *c.at(o).value);
        }
        double s = others == 0 ? kLoneScore : double(agree) / others;
        if (p == Path::CoT && others > 0 && agree < others) s = std::max(0.0, s - kCotPenalty);
        v.at(p) = s;
    }
    return v;
}

StubBackend::StubBackend(ConfidenceVector fallback, std::map<std::string, ConfidenceVector> by_question)
    : default_(fallback), by_question_(std::move(by_question)) {}

StubBackend StubBackend::from_json(const nlohmann::json& spec) {
    ConfidenceVector fallback;
    std::map<std::string, ConfidenceVector> by_question;
    if (spec.contains("default")) fallback = from_array(spec.at("default"));
    if (spec.contains("by_question")) {
        for (const auto& [id, arr] : spec.at("by_question").items()) by_question[id] = from_array(arr);
    }
    return StubBackend(fallback, std::move(by_question));
}

StubBackend StubBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read stub scores: " + path);
    auto spec = nlohmann::json::parse(in, nullptr, false);
    if (spec.is_discarded()) throw ConfigError("stub scores are not JSON: " + path);
    return from_json(spec);
}

ConfidenceVector StubBackend::score(const SerializedExample&, const std::string& question_id) {
    auto it = by_question_.find(question_id);
    return it == by_question_.end() ? default_ : it->second;
}

RemoteConfidenceBackend::RemoteConfidenceBackend(std::string url, JsonTransport transport)
    : url_(std::move(url)), transport_(std::move(transport)) {}

ConfidenceVector RemoteConfidenceBackend::score(const SerializedExample& example, const std::string&) {
    try {
        auto reply = transport_(url_, nlohmann::json{{"text", example.text}});
        return from_array(reply.at("scores"));
    } catch (const std::exception& e) {
        throw ScorerUnavailable(std::string("remote checker: ") + e.what());
    }
}

ConfidenceVector score(const SerializedExample& example, const std::string& question_id,
                       ConfidenceBackend& backend, bool* fell_back) {
    if (fell_back) *fell_back = false;
    ConfidenceVector v;
    try {
        v = backend.score(example, question_id);
    } catch (const ScorerUnavailable& e) {
        std::cerr << "warning: " << e.what() << "; using agreement heuristic\n";
        if (fell_back) *fell_back = true;
        AgreementBackend heuristic;
        v = heuristic.score(example, question_id);
    }
    for (Path p : kPaths) {
        const bool nothing = example.is_nothing(p) || example.candidates.at(p).is_nothing();
        v.at(p) = nothing ? 0.0 : clamp01(v.at(p));
    }
    return v;
}

Path argmax_path(const ConfidenceVector& scores) {
    Path best = kTieBreakOrder[0];
    for (Path p : kTieBreakOrder) {
        if (scores.at(p) > scores.at(best)) best = p;
    }
    return best;
}

std::optional<Path> gate(const ConfidenceVector& scores, double theta) {
    const Path best = argmax_path(scores);
    if (scores.at(best) > theta) return best;
    return std::nullopt;
}

double soft_label(std::string_view pred, std::string_view gold) {
    if (metrics::exact_match(pred, gold)) return 1.0;
    return metrics::token_f1(pred, gold);
}

void emit_cc_training_rows(std::ostream& out, const std::vector<CcTrainingRow>& rows) {
    out << "question_id\ttext\tcot_label\tpot_label\tsql_label\ttable_truncated\n";
    for (const auto& row : rows) {
        out << tsv_escape(row.question_id) << '\t' << tsv_escape(row.example.text);
        for (Path p : kPaths) {
            const auto& c = row.example.candidates.at(p);
            const double label = c.is_nothing() ? 0.0 : soft_label(*c.value, row.gold);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f", label);
            out << '\t' << buf;
        }
        out << '\t' << (row.example.table_truncated ? 1 : 0) << '\n';
    }
}

}  // namespace tabagent
