#pragma once

#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabagent/http_json.hpp"
#include "tabagent/table.hpp"
#include "tabagent/types.hpp"

namespace tabagent {

inline constexpr std::size_t kMaxPathBody = 3000;

struct SerializeOptions {
    /// Rows shown inside <Table>; 0 shows all. Size tags always carry the full
    /// table dimensions.
    std::size_t max_table_rows = 0;
};

struct SerializedExample {
    std::string text;
    /// Paths whose block was filled with <NOTHING>, indexed CoT, PoT, Text2SQL.
    std::array<bool, 3> nothing{};
    bool table_truncated = false;
    CandidateSet candidates;

    bool is_nothing(Path p) const { return nothing[static_cast<std::size_t>(p)]; }
};

/// Renders the tagged checker input. Traces may omit a path (treated as
/// skipped). A skipped path, or one whose block body exceeds kMaxPathBody
/// characters, gets <NOTHING> in every slot, and its candidate becomes NOTHING.
SerializedExample serialize_example(const Table& table, const Question& question,
                                    const std::vector<ReasoningTrace>& traces, const CandidateSet& candidates,
                                    const SerializeOptions& options = {});

/// Reads the last answer of each path back out of a serialized text, applying
/// the same rules as trace_candidate. Slots holding <NOTHING> yield NOTHING,
/// and so do results shaped like a failure ("Timeout", "KeyError: ...",
/// "Error(syntax): ...", "Rejected: ...").
CandidateSet parse_candidates(std::string_view text);

class ConfidenceBackend {
public:
    virtual ~ConfidenceBackend() = default;
    virtual std::string_view name() const = 0;
    /// May throw ScorerUnavailable.
    virtual ConfidenceVector score(const SerializedExample& example, const std::string& question_id) = 0;
};

/// Mean exact-match agreement of each candidate with the other non-NOTHING
/// candidates (0.5 for a lone candidate); CoT loses 0.05 unless it agrees with
/// every other candidate.
class AgreementBackend final : public ConfidenceBackend {
public:
    static constexpr double kLoneScore = 0.5;
    static constexpr double kCotPenalty = 0.05;

    std::string_view name() const override { return "heuristic"; }
    ConfidenceVector score(const SerializedExample& example, const std::string& question_id) override;
};

/// Fixture-driven scores: {"default": [cot, pot, sql], "by_question": {id: [...]}}.
class StubBackend final : public ConfidenceBackend {
public:
    StubBackend(ConfidenceVector fallback, std::map<std::string, ConfidenceVector> by_question = {});
    static StubBackend from_json(const nlohmann::json& spec);
    static StubBackend from_file(const std::string& path);

    std::string_view name() const override { return "stub"; }
    ConfidenceVector score(const SerializedExample& example, const std::string& question_id) override;

private:
    ConfidenceVector default_;
    std::map<std::string, ConfidenceVector> by_question_;
};

/// POSTs {"text"} and reads {"scores": [cot, pot, sql]}.
class RemoteConfidenceBackend final : public ConfidenceBackend {
public:
    RemoteConfidenceBackend(std::string url, JsonTransport transport);

    std::string_view name() const override { return "remote"; }
    ConfidenceVector score(const SerializedExample& example, const std::string& question_id) override;

private:
    std::string url_;
    JsonTransport transport_;
};

/// Backend scores clamped to [0, 1], with NOTHING paths forced to 0. Falls
/// back to the agreement heuristic when the backend throws ScorerUnavailable.
ConfidenceVector score(const SerializedExample& example, const std::string& question_id,
                       ConfidenceBackend& backend, bool* fell_back = nullptr);

/// Ties between equal scores go PoT, then Text2SQL, then CoT.
inline constexpr std::array<Path, 3> kTieBreakOrder = {Path::PoT, Path::Text2SQL, Path::CoT};

Path argmax_path(const ConfidenceVector& scores);

/// The selected path when max score > theta, nullopt when the judge is needed.
std::optional<Path> gate(const ConfidenceVector& scores, double theta);

/// 1.0 on exact match, token F1 otherwise.
double soft_label(std::string_view pred, std::string_view gold);

struct CcTrainingRow {
    std::string question_id;
    SerializedExample example;
    std::string gold;
};

/// Tab-separated: question_id, escaped serialized text, cot/pot/sql soft
/// labels (0 for NOTHING paths), table_truncated flag; with a header line.
void emit_cc_training_rows(std::ostream& out, const std::vector<CcTrainingRow>& rows);

}  // namespace tabagent
