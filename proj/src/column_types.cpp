#include "tabagent/column_types.hpp"

#include <algorithm>
#include <cctype>

namespace tabagent {

std::string_view sql_type_name(ColumnType type) {
    switch (type) {
        case ColumnType::Integer: return "INTEGER";
        case ColumnType::Decimal: return "DECIMAL";
        case ColumnType::Text: return "TEXT";
    }
    return "TEXT";
}

namespace {

bool is_integer_text(std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    return !s.empty() && std::all_of(s.begin(), s.end(),
                                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_decimal_text(std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    std::size_t digits = 0;
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    }
    if (digits == 0) return false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
        std::size_t exp_digits = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++exp_digits;
        if (exp_digits == 0) return false;
    }
    return i == s.size();
}

}  // namespace

std::optional<std::string> numeric_text(std::string_view raw) {
    std::string_view s = trim(raw);
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '$' || c == '%' || c == ' ') continue;
        // Thousands separator only between digits.
        if (c == ',' && i > 0 && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
            std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
            continue;
        }
        out.push_back(c);
    }
    if (out.empty()) return std::nullopt;
    if (is_integer_text(out) || is_decimal_text(out)) {
        if (out.front() == '+') out.erase(out.begin());
        return out;
    }
    return std::nullopt;
}

CellKind classify_cell(const Cell& cell) {
    if (!cell) return CellKind::Null;
    std::string lowered = to_lower(trim(*cell));
    if (lowered.empty() || lowered == "nan" || lowered == "none" || lowered == "null" ||
        lowered == "n/a") {
        return CellKind::Null;
    }
    auto numeric = numeric_text(lowered);
    if (!numeric) return CellKind::Text;
    return is_integer_text(*numeric) ? CellKind::Integer : CellKind::Decimal;
}

ColumnType infer_column_type(const Table& table, std::size_t column) {
    bool any_value = false;
    bool all_int = true;
    for (const auto& row : table.rows()) {
        switch (classify_cell(row[column])) {
            case CellKind::Null: break;
            case CellKind::Integer: any_value = true; break;
            case CellKind::Decimal: any_value = true; all_int = false; break;
            case CellKind::Text: return ColumnType::Text;
        }
    }
    if (!any_value) return ColumnType::Text;
    return all_int ? ColumnType::Integer : ColumnType::Decimal;
}

std::vector<ColumnType> infer_column_types(const Table& table) {
    std::vector<ColumnType> types;
    types.reserve(table.column_count());
    for (std::size_t c = 0; c < table.column_count(); ++c) types.push_back(infer_column_type(table, c));
    return types;
}

}  // namespace tabagent
