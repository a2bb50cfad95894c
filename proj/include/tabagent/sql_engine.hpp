#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "tabagent/column_types.hpp"
#include "tabagent/table.hpp"
#include "tabagent/types.hpp"

struct sqlite3;

namespace tabagent {

inline constexpr std::string_view kRelationName = "dataframe";

/// A table materialized as the single read-only relation "dataframe" in an
/// in-memory SQLite database. Columns use sanitized identifiers and inferred
/// INTEGER / DECIMAL / TEXT affinities; currency and percent symbols are
/// stripped from numeric cells before insertion.
class SqlEnvironment {
public:
    explicit SqlEnvironment(const Table& table,
                            std::chrono::milliseconds timeout = std::chrono::seconds(10));
    ~SqlEnvironment();

    SqlEnvironment(const SqlEnvironment&) = delete;
    SqlEnvironment& operator=(const SqlEnvironment&) = delete;

    const std::vector<std::string>& identifiers() const noexcept { return identifiers_; }
    const std::vector<ColumnType>& types() const noexcept { return types_; }

    /// Runs one read-only SELECT (or WITH ... SELECT). The value payload is the
    /// row-major list-of-lists rendering of the result set, e.g. "[[-4]]".
    /// Other statements, or more than one, are rejected with an Error. When the
    /// query names an unknown relation, it is retried once with that relation
    /// renamed to "dataframe".
    ExecutionResult execute(std::string_view query) const;

private:
    struct Outcome;
    Outcome run_once(std::string_view query) const;

    sqlite3* db_ = nullptr;
    std::vector<std::string> identifiers_;
    std::vector<ColumnType> types_;
    std::chrono::milliseconds timeout_;
    mutable std::mutex mutex_;
};

ExecutionResult execute_sql(const SqlEnvironment& env, std::string_view query);

/// Replaces whole-word, case-insensitive occurrences of `relation` outside
/// string literals and comments with "dataframe".
std::string rewrite_relation(std::string_view query, std::string_view relation);

}  // namespace tabagent
