#include "tabagent/sql_engine.hpp"

#include <sqlite3.h>

#include <cctype>
#include <stdexcept>

#include "tabagent/errors.hpp"
#include "tabagent/py_literal.hpp"

namespace tabagent {

namespace {

std::string quote_identifier(std::string_view id) {
    std::string out = "\"";
    for (char c : id) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Skips whitespace and SQL comments starting at pos.
std::size_t skip_trivia(std::string_view s, std::size_t pos) {
    for (;;) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (s.substr(pos, 2) == "--") {
            while (pos < s.size() && s[pos] != '\n') ++pos;
        } else if (s.substr(pos, 2) == "/*") {
            auto end = s.find("*/", pos + 2);
            pos = end == std::string_view::npos ? s.size() : end + 2;
        } else {
            return pos;
        }
    }
}

bool only_trivia(std::string_view s) {
    std::size_t pos = 0;
    for (;;) {
        pos = skip_trivia(s, pos);
        if (pos < s.size() && s[pos] == ';') {
            ++pos;
            continue;
        }
        return pos >= s.size();
    }
}

std::string first_keyword(std::string_view s) {
    std::size_t pos = skip_trivia(s, 0);
    while (pos < s.size() && s[pos] == '(') pos = skip_trivia(s, pos + 1);
    std::string word;
    while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) {
        word += static_cast<char>(std::toupper(static_cast<unsigned char>(s[pos++])));
    }
    return word;
}

std::chrono::steady_clock::time_point* active_deadline(void* p) {
    return static_cast<std::chrono::steady_clock::time_point*>(p);
}

int progress_guard(void* p) {
    return std::chrono::steady_clock::now() > *active_deadline(p) ? 1 : 0;
}

py::Scalar read_column(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_INTEGER:
            return {py::Scalar::Kind::Integer, std::to_string(sqlite3_column_int64(stmt, col))};
        case SQLITE_FLOAT:
            return {py::Scalar::Kind::Float, py::repr(sqlite3_column_double(stmt, col))};
        case SQLITE_NULL:
            return {py::Scalar::Kind::None, "None"};
        default: {
            auto text = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
            int bytes = sqlite3_column_bytes(stmt, col);
            return {py::Scalar::Kind::String, std::string(text ? text : "", static_cast<std::size_t>(bytes))};
        }
    }
}

}  // namespace

struct SqlEnvironment::Outcome {
    ExecutionResult result;
    std::string missing_relation;
};

SqlEnvironment::SqlEnvironment(const Table& table, std::chrono::milliseconds timeout)
    : identifiers_(sanitize_headers(table.columns())),
      types_(infer_column_types(table)),
      timeout_(timeout) {
    if (sqlite3_open_v2(":memory:", &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX,
                        nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw std::runtime_error("sqlite open failed: " + msg);
    }

    std::string create = "CREATE TABLE " + std::string(kRelationName) + " (";
    std::string insert = "INSERT INTO " + std::string(kRelationName) + " VALUES (";
    for (std::size_t c = 0; c < identifiers_.size(); ++c) {
        if (c) {
            create += ", ";
            insert += ", ";
        }
        // DECIMAL would get NUMERIC affinity, which stores 12000.0 as an integer.
        const std::string storage = types_[c] == ColumnType::Decimal ? "REAL" : std::string(sql_type_name(types_[c]));
        create += quote_identifier(identifiers_[c]) + " " + storage;
        insert += "?";
    }
    create += ")";
    insert += ")";

    auto exec = [&](const std::string& sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown error";
            sqlite3_free(err);
            sqlite3_close(db_);
            throw std::runtime_error("sqlite: " + msg);
        }
    };
    exec(create);
    exec("BEGIN");

    sqlite3_stmt* stmt = nullptr;
    sqlite3_prepare_v2(db_, insert.c_str(), -1, &stmt, nullptr);
    for (const auto& row : table.rows()) {
        sqlite3_reset(stmt);
        sqlite3_clear_bindings(stmt);
        for (std::size_t c = 0; c < row.size(); ++c) {
            const int slot = static_cast<int>(c) + 1;
            const Cell& cell = row[c];
            if (types_[c] == ColumnType::Text) {
                if (cell && !cell->empty()) {
                    sqlite3_bind_text(stmt, slot, cell->c_str(), static_cast<int>(cell->size()), SQLITE_TRANSIENT);
                } else {
                    sqlite3_bind_null(stmt, slot);
                }
                continue;
            }
            auto numeric = cell ? numeric_text(*cell) : std::nullopt;
            if (!numeric) {
                sqlite3_bind_null(stmt, slot);
            } else if (types_[c] == ColumnType::Integer) {
                try {
                    sqlite3_bind_int64(stmt, slot, std::stoll(*numeric));
                } catch (const std::out_of_range&) {
                    sqlite3_bind_double(stmt, slot, std::stod(*numeric));
                }
            } else {
                sqlite3_bind_double(stmt, slot, std::stod(*numeric));
            }
        }
        sqlite3_step(stmt);
    }
    sqlite3_finalize(stmt);
    exec("COMMIT");
    exec("PRAGMA query_only = ON");
}

SqlEnvironment::~SqlEnvironment() { sqlite3_close(db_); }

SqlEnvironment::Outcome SqlEnvironment::run_once(std::string_view query) const {
    const std::string keyword = first_keyword(query);
    if (keyword != "SELECT" && keyword != "WITH") {
        return {ExecutionResult::error("Rejected: only a single read-only SELECT is allowed"), {}};
    }

    sqlite3_stmt* stmt = nullptr;
    const char* tail = nullptr;
    const std::string sql(query);
    if (sqlite3_prepare_v2(db_, sql.c_str(), static_cast<int>(sql.size()), &stmt, &tail) != SQLITE_OK) {
        std::string msg = sqlite3_errmsg(db_);
        sqlite3_finalize(stmt);
        Outcome out{ExecutionResult::error("Error(syntax): " + msg), {}};
        constexpr std::string_view prefix = "no such table: ";
        if (msg.rfind(prefix, 0) == 0) out.missing_relation = msg.substr(prefix.size());
        return out;
    }
    if (stmt == nullptr) return {ExecutionResult::error("Error(syntax): empty query"), {}};
    std::unique_ptr<sqlite3_stmt, int (*)(sqlite3_stmt*)> guard(stmt, sqlite3_finalize);

    if (!only_trivia(std::string_view(tail, static_cast<std::size_t>(sql.data() + sql.size() - tail)))) {
        return {ExecutionResult::error("Rejected: multiple statements are not allowed"), {}};
    }
    if (!sqlite3_stmt_readonly(stmt)) {
        return {ExecutionResult::error("Rejected: statement is not read-only"), {}};
    }

    auto deadline = std::chrono::steady_clock::now() + timeout_;
    sqlite3_progress_handler(db_, 1000, progress_guard, &deadline);

    py::Rows rows;
    const int columns = sqlite3_column_count(stmt);
    int rc;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
        std::vector<py::Scalar> row;
        row.reserve(static_cast<std::size_t>(columns));
        for (int c = 0; c < columns; ++c) row.push_back(read_column(stmt, c));
        rows.push_back(std::move(row));
    }
    sqlite3_progress_handler(db_, 0, nullptr, nullptr);

    if (rc == SQLITE_INTERRUPT) return {ExecutionResult::timeout(), {}};
    if (rc != SQLITE_DONE) return {ExecutionResult::error("Error(runtime): " + std::string(sqlite3_errmsg(db_))), {}};
    return {ExecutionResult::value(py::render_rows(rows)), {}};
}

ExecutionResult SqlEnvironment::execute(std::string_view query) const {
    std::lock_guard lock(mutex_);
    auto outcome = run_once(query);
    if (!outcome.missing_relation.empty()) {
        auto retried = run_once(rewrite_relation(query, outcome.missing_relation));
        return retried.result;
    }
    return outcome.result;
}

ExecutionResult execute_sql(const SqlEnvironment& env, std::string_view query) {
    return env.execute(query);
}

std::string rewrite_relation(std::string_view query, std::string_view relation) {
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    const std::string target = to_lower(relation);
    std::string out;
    std::size_t i = 0;
    while (i < query.size()) {
        char c = query[i];
        if (c == '\'' || c == '"' || c == '`') {
            // Quoted: string literal or quoted identifier. Only identifiers are renamed.
            std::size_t end = query.find(c, i + 1);
            if (end == std::string_view::npos) end = query.size() - 1;
            std::string_view quoted = query.substr(i, end - i + 1);
            if (c != '\'' && to_lower(quoted.substr(1, quoted.size() >= 2 ? quoted.size() - 2 : 0)) == target) {
                out += kRelationName;
            } else {
                out += quoted;
            }
            i = end + 1;
        } else if (query.substr(i, 2) == "--") {
            std::size_t end = query.find('\n', i);
            if (end == std::string_view::npos) end = query.size();
            out += query.substr(i, end - i);
            i = end;
        } else if (is_word(c)) {
            std::size_t end = i;
            while (end < query.size() && is_word(query[end])) ++end;
            std::string_view word = query.substr(i, end - i);
            out += to_lower(word) == target ? std::string(kRelationName) : std::string(word);
            i = end;
        } else {
            out += c;
            ++i;
        }
    }
    return out;
}

}  // namespace tabagent
