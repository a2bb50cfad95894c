#pragma once

#include <array>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tabagent/http_json.hpp"
#include "tabagent/table.hpp"

namespace tabagent {

struct SchedulerFeatures {
    int n_rows = 0;
    int n_cols = 0;
    int table_size = 0;
    int n_unique_question_words = 0;
    int n_numeric_tokens = 0;
    int n_schema_overlap_words = 0;
    bool has_int = false;
    bool has_float = false;
    bool has_str = false;
    bool has_nan = false;

    static constexpr std::array<std::string_view, 10> kNames = {
        "n_rows",   "n_cols",    "table_size", "n_unique_question_words", "n_numeric_tokens",
        "n_schema_overlap_words", "has_int", "has_float", "has_str", "has_nan"};

    /// Values in kNames order, booleans as 0/1.
    std::array<double, 10> values() const;

    friend bool operator==(const SchedulerFeatures&, const SchedulerFeatures&) = default;
};

/// Independent probabilities that each code path answers correctly.
struct PathScores {
    double prob_pot = 0.5;
    double prob_sql = 0.5;
};

/// Lowercased whitespace tokens with punctuation stripped from both ends;
/// empty tokens dropped.
std::vector<std::string> question_words(std::string_view text);

SchedulerFeatures extract_features(const Table& table, const Question& question);

/// Header line used as the schema text for scorers and training rows.
std::string schema_text(const Table& table);

class SchedulerBackend {
public:
    virtual ~SchedulerBackend() = default;
    virtual std::string_view name() const = 0;
    /// May throw ScorerUnavailable.
    virtual PathScores score(const SchedulerFeatures& features, const Question& question,
                             const std::string& schema) = 0;
};

/// Rule table documented in README.md.
class HeuristicScheduler final : public SchedulerBackend {
public:
    std::string_view name() const override { return "heuristic"; }
    PathScores score(const SchedulerFeatures& features, const Question& question,
                     const std::string& schema) override;
};

/// prob = sigmoid(bias + w . features) per path. Weights file lines are
/// "key = value" with keys bias_pot, bias_sql, pot.<feature>, sql.<feature>;
/// '#' starts a comment. Missing keys are zero.
class LinearScheduler final : public SchedulerBackend {
public:
    LinearScheduler() = default;
    explicit LinearScheduler(std::map<std::string, double> weights);

    static LinearScheduler from_text(std::string_view text);
    static LinearScheduler from_file(const std::string& path);

    std::string_view name() const override { return "linear"; }
    PathScores score(const SchedulerFeatures& features, const Question& question,
                     const std::string& schema) override;

private:
    double bias_pot_ = 0.0;
    double bias_sql_ = 0.0;
    std::array<double, 10> w_pot_{};
    std::array<double, 10> w_sql_{};
};

/// POSTs {"features": {...}, "question", "schema"} and reads
/// {"prob_pot", "prob_sql"}.
class RemoteScheduler final : public SchedulerBackend {
public:
    RemoteScheduler(std::string url, JsonTransport transport);

    std::string_view name() const override { return "remote"; }
    PathScores score(const SchedulerFeatures& features, const Question& question,
                     const std::string& schema) override;

private:
    std::string url_;
    JsonTransport transport_;
};

/// Scores with the backend, falling back to the heuristic when it throws
/// ScorerUnavailable. Results are clamped to [0, 1].
PathScores score_paths(const SchedulerFeatures& features, const Question& question,
                       const std::string& schema, SchedulerBackend& backend, bool* fell_back = nullptr);

struct SchedulerTrainingRow {
    Table table;
    Question question;
    bool pot_correct = false;
    bool sql_correct = false;
};

/// Tab-separated: the ten features, question, schema, pot_label, sql_label,
/// with a header line. Text fields are escaped with tsv_escape.
void emit_training_rows(std::ostream& out, const std::vector<SchedulerTrainingRow>& rows);

}  // namespace tabagent
