#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabagent {

/// A table cell. Values stay as text; nullopt is a missing value. Numeric
/// typing happens per column in the executors (see column_types.hpp).
using Cell = std::optional<std::string>;
using Row = std::vector<Cell>;

class Table {
public:
    Table() = default;

    /// Throws MalformedTable unless every row has columns.size() cells and all
    /// headers are non-empty.
    Table(std::vector<std::string> columns, std::vector<Row> rows,
          std::optional<std::string> name = std::nullopt);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }
    const std::optional<std::string>& name() const noexcept { return name_; }

    std::size_t row_count() const noexcept { return rows_.size(); }
    std::size_t column_count() const noexcept { return columns_.size(); }

    friend bool operator==(const Table&, const Table&) = default;

private:
    std::vector<std::string> columns_;
    std::vector<Row> rows_;
    std::optional<std::string> name_;
};

struct Question {
    std::string text;
    std::string id;
    std::optional<std::string> category;
};

/// Pipe-delimited markdown: header, ":---" separator, one line per row, joined
/// by '\n' without a trailing newline. Null cells render empty; '|' is escaped.
std::string table_to_markdown(const Table& table);

/// Inverse of table_to_markdown. Cells are trimmed; empty cells become null.
/// Throws MalformedTable on missing separator or ragged rows.
Table parse_markdown_table(std::string_view text);

/// Maps a header to [A-Za-z_][A-Za-z0-9_]*: every other byte becomes '_', and a
/// leading digit gets a '_' prefix.
std::string sanitize_identifier(std::string_view header);

/// Sanitizes a header set, resolving collisions with "_2", "_3", ... suffixes
/// in column order.
std::vector<std::string> sanitize_headers(const std::vector<std::string>& headers);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Escapes backslash, tab, CR and LF so the text fits one TSV field.
std::string tsv_escape(std::string_view s);

}  // namespace tabagent
