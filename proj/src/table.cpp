#include "tabagent/table.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "tabagent/errors.hpp"

namespace tabagent {

Table::Table(std::vector<std::string> columns, std::vector<Row> rows,
             std::optional<std::string> name)
    : columns_(std::move(columns)), rows_(std::move(rows)), name_(std::move(name)) {
    if (columns_.empty()) throw MalformedTable("table has no columns");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].empty()) {
            throw MalformedTable("empty header at column " + std::to_string(c));
        }
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].size() != columns_.size()) {
            throw MalformedTable("row " + std::to_string(r) + " has " +
                                 std::to_string(rows_[r].size()) + " cells, expected " +
                                 std::to_string(columns_.size()));
        }
    }
}

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

namespace {

std::string escape_cell(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '|' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
    out += '|';
    for (const auto& cell : cells) {
        out += ' ';
        out += cell;
        out += " |";
    }
}

// Splits one markdown line into raw (still escaped) cells.
std::vector<std::string> split_line(std::string_view line) {
    line = trim(line);
    if (!line.empty() && line.front() == '|') line.remove_prefix(1);
    // A trailing pipe closes the row unless it is escaped.
    if (!line.empty() && line.back() == '|') {
        std::size_t backslashes = 0;
        for (std::size_t i = line.size() - 1; i > 0 && line[i - 1] == '\\'; --i) ++backslashes;
        if (backslashes % 2 == 0) line.remove_suffix(1);
    }
    std::vector<std::string> cells;
    std::string current;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '\\' && i + 1 < line.size() && (line[i + 1] == '|' || line[i + 1] == '\\')) {
            current += c;
            current += line[++i];
        } else if (c == '|') {
            cells.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    cells.push_back(std::move(current));
    return cells;
}

std::string unescape_cell(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 1 < raw.size() && (raw[i + 1] == '|' || raw[i + 1] == '\\')) {
            ++i;
        }
        out.push_back(raw[i]);
    }
    return out;
}

bool is_separator_cell(std::string_view cell) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == ':') cell.remove_prefix(1);
    if (!cell.empty() && cell.back() == ':') cell.remove_suffix(1);
    return !cell.empty() && std::all_of(cell.begin(), cell.end(), [](char c) { return c == '-'; });
}

}  // namespace

std::string table_to_markdown(const Table& table) {
    std::string out;
    std::vector<std::string> cells;
    for (const auto& header : table.columns()) cells.push_back(escape_cell(header));
    append_row(out, cells);
    out += "\n|";
    for (std::size_t c = 0; c < table.column_count(); ++c) out += ":---|";
    for (const auto& row : table.rows()) {
        cells.clear();
        for (const auto& cell : row) cells.push_back(cell ? escape_cell(*cell) : std::string{});
        out += '\n';
        append_row(out, cells);
    }
    return out;
}

Table parse_markdown_table(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        if (!line.empty()) lines.push_back(line);
        start = end + 1;
    }
    if (lines.size() < 2) throw MalformedTable("markdown table needs a header and separator row");

    auto header_cells = split_line(lines[0]);
    auto separator = split_line(lines[1]);
    if (separator.size() != header_cells.size() ||
        !std::all_of(separator.begin(), separator.end(),
                     [](const std::string& c) { return is_separator_cell(c); })) {
        throw MalformedTable("missing or malformed separator row");
    }

    std::vector<std::string> columns;
    for (const auto& h : header_cells) columns.push_back(unescape_cell(trim(h)));

    std::vector<Row> rows;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        auto raw = split_line(lines[i]);
        if (raw.size() != columns.size()) {
            throw MalformedTable("ragged row " + std::to_string(i - 2) + ": " +
                                 std::to_string(raw.size()) + " cells, expected " +
                                 std::to_string(columns.size()));
        }
        Row row;
        for (const auto& cell : raw) {
            auto value = unescape_cell(trim(cell));
            row.push_back(value.empty() ? Cell{} : Cell{std::move(value)});
        }
        rows.push_back(std::move(row));
    }
    return Table(std::move(columns), std::move(rows));
}

std::string sanitize_identifier(std::string_view header) {
    std::string out;
    out.reserve(header.size() + 1);
    for (char c : header) {
        auto u = static_cast<unsigned char>(c);
        out.push_back(u < 0x80 && (std::isalnum(u) || c == '_') ? c : '_');
    }
    if (out.empty()) return "_";
    if (std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(out.begin(), '_');
    return out;
}

std::vector<std::string> sanitize_headers(const std::vector<std::string>& headers) {
    std::vector<std::string> out;
    out.reserve(headers.size());
    std::set<std::string> used;
    for (const auto& h : headers) {
        std::string base = sanitize_identifier(h);
        std::string candidate = base;
        // SQL identifiers compare case-insensitively, so collisions do too.
        for (int suffix = 2; used.count(to_lower(candidate)) != 0; ++suffix) {
            candidate = base + "_" + std::to_string(suffix);
        }
        used.insert(to_lower(candidate));
        out.push_back(std::move(candidate));
    }
    return out;
}

std::string tsv_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace tabagent
