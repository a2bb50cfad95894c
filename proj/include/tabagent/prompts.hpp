#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabagent/column_types.hpp"
#include "tabagent/table.hpp"
#include "tabagent/types.hpp"

namespace tabagent::prompts {

struct PromptTemplate {
    AgentRole role;
    std::string_view few_shot_block;       // fixed text, pinned by checksum tests
    std::vector<std::string> query_slots;  // placeholders filled per call
    std::vector<std::string> response_keys;
};

const PromptTemplate& template_for(AgentRole role);

/// Task description handed to the CoT agent for one table/question.
std::string cot_query(const Table& table, const Question& question);
/// Includes the pandas preamble that rebuilds the table as `df`.
std::string pot_query(const Table& table, const Question& question);
/// Includes the commented schema of the "dataframe" relation.
std::string sql_query(const Table& table, const Question& question);

/// "import pandas as pd\ndata = {...}\ndf = pd.DataFrame(data)".
std::string dataframe_preamble(const Table& table);
/// "-- Table: dataframe\n-- Columns: ...\n-- Rows: ...".
std::string sql_schema_comment(const Table& table);

std::string cot_prompt(const Table& table, const Question& question);
std::string pot_prompt(const Table& table, const Question& question);
std::string sql_prompt(const Table& table, const Question& question);
std::string debug_prompt(AgentRole role, const Table& table, const Question& question,
                         std::string_view code, std::string_view execution_result);
std::string format_matcher_prompt(const Question& question, std::string_view answer);

/// Everything the judge sees about one path.
struct JudgeEvidence {
    Path path;
    std::vector<Iteration> iterations;  // most recent last
    std::string solution;               // CoT only
    std::string answer;                 // kNothingToken when absent
};

std::string judge_prompt(const Table& table, const Question& question,
                         const std::vector<JudgeEvidence>& evidence,
                         const std::optional<ConfidenceVector>& scores);

/// Python literal for a cell inside the dataframe preamble.
std::string python_cell(const Cell& cell, ColumnType type);

}  // namespace tabagent::prompts
