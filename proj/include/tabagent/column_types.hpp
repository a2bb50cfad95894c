#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabagent/table.hpp"

namespace tabagent {

enum class CellKind { Null, Integer, Decimal, Text };
enum class ColumnType { Integer, Decimal, Text };

std::string_view sql_type_name(ColumnType type);

/// Strips currency/percent symbols and thousands separators ("$22,600" -> "22600").
/// Returns nullopt when the remainder is not a plain number.
std::optional<std::string> numeric_text(std::string_view raw);

/// Null covers missing cells and textual markers such as "", "nan", "None".
CellKind classify_cell(const Cell& cell);

/// Integer if every non-null cell is an integer, Decimal if every non-null
/// cell is numeric, Text otherwise (including all-null columns).
ColumnType infer_column_type(const Table& table, std::size_t column);

std::vector<ColumnType> infer_column_types(const Table& table);

}  // namespace tabagent
