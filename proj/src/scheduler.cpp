#include "tabagent/scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "tabagent/column_types.hpp"
#include "tabagent/errors.hpp"

namespace tabagent {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string strip_punct(std::string_view token) {
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && is_punct(token[b])) ++b;
    while (e > b && is_punct(token[e - 1])) --e;
    return std::string(token.substr(b, e - b));
}

// Sentence punctuation around a number ("$155," or "(13.50)") without the
// sign, currency and percent symbols numeric_text understands.
std::string strip_number_edges(std::string_view token) {
    constexpr std::string_view lead = "([{\"'";
    constexpr std::string_view trail = ")]}\"'?!.,;:";
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && lead.find(token[b]) != std::string_view::npos) ++b;
    while (e > b && trail.find(token[e - 1]) != std::string_view::npos) --e;
    return std::string(token.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp01(double x) {
    if (std::isnan(x)) return 0.0;
    return std::clamp(x, 0.0, 1.0);
}

}  // namespace

std::array<double, 10> SchedulerFeatures::values() const {
    return {double(n_rows),
            double(n_cols),
            double(table_size),
            double(n_unique_question_words),
            double(n_numeric_tokens),
            double(n_schema_overlap_words),
            has_int ? 1.0 : 0.0,
            has_float ? 1.0 : 0.0,
            has_str ? 1.0 : 0.0,
            has_nan ? 1.0 : 0.0};
}

std::vector<std::string> question_words(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& token : split_ws(to_lower(text))) {
        auto word = strip_punct(token);
        if (!word.empty()) out.push_back(std::move(word));
    }
    return out;
}

SchedulerFeatures extract_features(const Table& table, const Question& question) {
    SchedulerFeatures f;
    f.n_rows = static_cast<int>(table.row_count());
    f.n_cols = static_cast<int>(table.column_count());
    f.table_size = f.n_rows * f.n_cols;

    const auto words = question_words(question.text);
    const std::set<std::string> unique(words.begin(), words.end());
    f.n_unique_question_words = static_cast<int>(unique.size());

    for (const auto& token : split_ws(question.text)) {
        if (numeric_text(strip_number_edges(token))) ++f.n_numeric_tokens;
    }

    std::set<std::string> header_words;
    for (const auto& header : table.columns()) {
        for (const auto& w : question_words(header)) header_words.insert(w);
    }
    for (const auto& id : sanitize_headers(table.columns())) {
        const auto lowered = to_lower(id);
        header_words.insert(lowered);
        std::size_t start = 0;
        while (start <= lowered.size()) {
            auto end = lowered.find('_', start);
            if (end == std::string::npos) end = lowered.size();
            if (end > start) header_words.insert(lowered.substr(start, end - start));
            start = end + 1;
        }
    }
    for (const auto& w : unique) {
        if (header_words.count(w)) ++f.n_schema_overlap_words;
    }

    for (const auto& row : table.rows()) {
        for (const auto& cell : row) {
            switch (classify_cell(cell)) {
                case CellKind::Null: f.has_nan = true; break;
                case CellKind::Integer: f.has_int = true; break;
                case CellKind::Decimal: f.has_float = true; break;
                case CellKind::Text: f.has_str = true; break;
            }
        }
    }
    return f;
}

std::string schema_text(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        if (c) out += " | ";
        out += table.columns()[c];
    }
    return out;
}

PathScores HeuristicScheduler::score(const SchedulerFeatures& f, const Question&, const std::string&) {
    PathScores s;
    s.prob_pot = 0.5 + (f.has_nan ? 0.15 : 0.0) + (f.has_float ? 0.1 : 0.0) +
                 (f.n_numeric_tokens >= 2 ? 0.1 : 0.0);
    s.prob_sql = 0.5 + (!f.has_str ? 0.35 : 0.0) + (f.n_schema_overlap_words >= 1 ? 0.1 : 0.0) +
                 (f.table_size > 500 ? 0.1 : 0.0);
    s.prob_pot = clamp01(s.prob_pot);
    s.prob_sql = clamp01(s.prob_sql);
    return s;
}

LinearScheduler::LinearScheduler(std::map<std::string, double> weights) {
    for (const auto& [key, value] : weights) {
        if (key == "bias_pot") {
            bias_pot_ = value;
            continue;
        }
        if (key == "bias_sql") {
            bias_sql_ = value;
            continue;
        }
        const auto dot = key.find('.');
        const std::string head = key.substr(0, dot);
        const std::string feature = dot == std::string::npos ? "" : key.substr(dot + 1);
        auto it = std::find(SchedulerFeatures::kNames.begin(), SchedulerFeatures::kNames.end(), feature);
        if ((head != "pot" && head != "sql") || it == SchedulerFeatures::kNames.end()) {
            throw ConfigError("unknown scheduler weight: " + key);
        }
        const auto i = static_cast<std::size_t>(it - SchedulerFeatures::kNames.begin());
        (head == "pot" ? w_pot_ : w_sql_)[i] = value;
    }
}

LinearScheduler LinearScheduler::from_text(std::string_view text) {
    std::map<std::string, double> weights;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("weights line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        try {
            std::size_t used = 0;
            weights[key] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ConfigError("weights line " + std::to_string(line_no) + ": bad number '" + value + "'");
        }
    }
    return LinearScheduler(std::move(weights));
}

LinearScheduler LinearScheduler::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read weights file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

PathScores LinearScheduler::score(const SchedulerFeatures& f, const Question&, const std::string&) {
    const auto x = f.values();
    double zp = bias_pot_;
    double zs = bias_sql_;
    for (std::size_t i = 0; i < x.size(); ++i) {
        zp += w_pot_[i] * x[i];
        zs += w_sql_[i] * x[i];
    }
    return {sigmoid(zp), sigmoid(zs)};
}

RemoteScheduler::RemoteScheduler(std::string url, JsonTransport transport)
    : url_(std::move(url)), transport_(std::move(transport)) {}

PathScores RemoteScheduler::score(const SchedulerFeatures& f, const Question& question,
                                  const std::string& schema) {
    nlohmann::json features = nlohmann::json::object();
    const auto x = f.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
        features[std::string(SchedulerFeatures::kNames[i])] = i < 6 ? nlohmann::json(int(x[i])) : nlohmann::json(x[i] != 0);
    }
    nlohmann::json body{{"features", features}, {"question", question.text}, {"schema", schema}};
    try {
        auto reply = transport_(url_, body);
        return {reply.at("prob_pot").get<double>(), reply.at("prob_sql").get<double>()};
    } catch (const std::exception& e) {
        throw ScorerUnavailable(std::string("remote scheduler: ") + e.what());
    }
}

PathScores score_paths(const SchedulerFeatures& features, const Question& question, const std::string& schema,
                       SchedulerBackend& backend, bool* fell_back) {
    if (fell_back) *fell_back = false;
    PathScores s;
    try {
        s = backend.score(features, question, schema);
    } catch (const ScorerUnavailable& e) {
        std::cerr << "warning: " << e.what() << "; using heuristic scheduler\n";
        if (fell_back) *fell_back = true;
        HeuristicScheduler heuristic;
        s = heuristic.score(features, question, schema);
    }
    return {clamp01(s.prob_pot), clamp01(s.prob_sql)};
}

void emit_training_rows(std::ostream& out, const std::vector<SchedulerTrainingRow>& rows) {
    for (auto name : SchedulerFeatures::kNames) out << name << '\t';
    out << "question\tschema\tpot_label\tsql_label\n";
    for (const auto& row : rows) {
        const auto f = extract_features(row.table, row.question);
        const auto x = f.values();
        for (double v : x) out << static_cast<long long>(v) << '\t';
        out << tsv_escape(row.question.text) << '\t' << tsv_escape(schema_text(row.table)) << '\t'
            << (row.pot_correct ? 1 : 0) << '\t' << (row.sql_correct ? 1 : 0) << '\n';
    }
}

}  // namespace tabagent
