#include "tabagent/dataset.hpp"

#include <fstream>
#include <sstream>

#include "tabagent/errors.hpp"
#include "tabagent/py_literal.hpp"

namespace tabagent {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read dataset: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    auto cell = json_cell(v);
    return cell.value_or("");
}

Table table_from_json(const nlohmann::json& t, const std::string& columns_key, const std::string& rows_key) {
    if (t.is_string()) return parse_markdown_table(t.get<std::string>());
    if (!t.is_object()) throw MalformedTable("table must be an object or a markdown string");
    if (!t.contains(columns_key) || !t.contains(rows_key)) {
        throw MalformedTable("table needs '" + columns_key + "' and '" + rows_key + "'");
    }
    std::vector<std::string> columns;
    for (const auto& c : t.at(columns_key)) columns.push_back(scalar_text(c));
    std::vector<Row> rows;
    for (const auto& r : t.at(rows_key)) {
        if (!r.is_array()) throw MalformedTable("each row must be an array");
        Row row;
        for (const auto& cell : r) row.push_back(json_cell(cell));
        rows.push_back(std::move(row));
    }
    std::optional<std::string> name;
    if (t.contains("name") && t.at("name").is_string()) name = t.at("name").get<std::string>();
    return Table(std::move(columns), std::move(rows), std::move(name));
}

std::string default_id(std::size_t index) { return "q" + std::to_string(index); }

void check_unique_ids(const std::vector<DatasetItem>& items) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!seen.insert(items[i].question.id).second) {
            throw MalformedDataset(i, "duplicate id '" + items[i].question.id + "'");
        }
    }
}

const nlohmann::json& item_array(const nlohmann::json& doc, std::initializer_list<const char*> keys) {
    if (doc.is_array()) return doc;
    if (doc.is_object()) {
        for (const char* key : keys) {
            if (doc.contains(key) && doc.at(key).is_array()) return doc.at(key);
        }
    }
    throw MalformedDataset(0, "expected an array of items");
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_commas(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto end = line.find(',', start);
        out.emplace_back(trim(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
    if (name == "generic-json") return DatasetFormat::GenericJson;
    if (name == "tablebench-jsonl") return DatasetFormat::TableBenchJsonl;
    if (name == "penguins-json") return DatasetFormat::PenguinsJson;
    return std::nullopt;
}

std::string_view to_string(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::GenericJson: return "generic-json";
        case DatasetFormat::TableBenchJsonl: return "tablebench-jsonl";
        case DatasetFormat::PenguinsJson: return "penguins-json";
    }
    return "?";
}

TableBenchManifest TableBenchManifest::from_json(const nlohmann::json& spec) {
    TableBenchManifest m;
    if (!spec.is_object()) throw ConfigError("manifest must be a JSON object");
    for (const auto& [key, value] : spec.items()) {
        if (!value.is_string()) throw ConfigError("manifest value for '" + key + "' must be a string");
        const auto v = value.get<std::string>();
        if (key == "id") m.id = v;
        else if (key == "question") m.question = v;
        else if (key == "answer") m.answer = v;
        else if (key == "table") m.table = v;
        else if (key == "category") m.category = v;
        else if (key == "columns") m.columns = v;
        else if (key == "rows") m.rows = v;
        else throw ConfigError("unknown manifest key: " + key);
    }
    return m;
}

Cell json_cell(const nlohmann::json& value) {
    switch (value.type()) {
        case nlohmann::json::value_t::null: return std::nullopt;
        case nlohmann::json::value_t::string: return value.get<std::string>();
        case nlohmann::json::value_t::boolean: return value.get<bool>() ? "True" : "False";
        case nlohmann::json::value_t::number_integer: return std::to_string(value.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return std::to_string(value.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return py::repr(value.get<double>());
        default: return value.dump();
    }
}

std::vector<DatasetItem> parse_generic_json(std::string_view text) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw MalformedDataset(0, "file is not valid JSON");
    const auto& items = item_array(doc, {"items", "data"});
    std::vector<DatasetItem> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        try {
            if (!it.is_object()) throw MalformedDataset(i, "item is not an object");
            for (const char* key : {"table", "question", "answer"}) {
                if (!it.contains(key)) throw MalformedDataset(i, std::string("missing '") + key + "'");
            }
            DatasetItem item;
            item.table = table_from_json(it.at("table"), "columns", "rows");
            item.question.text = scalar_text(it.at("question"));
            item.question.id = it.contains("id") ? scalar_text(it.at("id")) : default_id(i);
            if (it.contains("category") && !it.at("category").is_null()) {
                item.question.category = scalar_text(it.at("category"));
            }
            item.gold = scalar_text(it.at("answer"));
            out.push_back(std::move(item));
        } catch (const MalformedTable& e) {
            throw MalformedDataset(i, e.what());
        } catch (const nlohmann::json::exception& e) {
            throw MalformedDataset(i, e.what());
        }
    }
    check_unique_ids(out);
    return out;
}

std::vector<DatasetItem> parse_tablebench_jsonl(std::string_view text, const TableBenchManifest& m) {
    std::vector<DatasetItem> out;
    std::size_t index = 0;
    for (const auto& line : split_lines(text)) {
        if (trim(line).empty()) continue;
        const std::size_t i = index++;
        auto it = nlohmann::json::parse(line, nullptr, false);
        if (it.is_discarded() || !it.is_object()) throw MalformedDataset(i, "line is not a JSON object");
        try {
            for (const auto& key : {m.table, m.question, m.answer}) {
                if (!it.contains(key)) throw MalformedDataset(i, "missing '" + key + "'");
            }
            DatasetItem item;
            auto table_field = it.at(m.table);
            // Some releases store the table object as a JSON string.
            if (table_field.is_string()) {
                auto nested = nlohmann::json::parse(table_field.get<std::string>(), nullptr, false);
                if (!nested.is_discarded() && nested.is_object()) table_field = nested;
            }
            item.table = table_from_json(table_field, m.columns, m.rows);
            item.question.text = scalar_text(it.at(m.question));
            item.question.id = it.contains(m.id) ? scalar_text(it.at(m.id)) : default_id(i);
            if (it.contains(m.category) && !it.at(m.category).is_null()) {
                item.question.category = scalar_text(it.at(m.category));
            }
            item.gold = scalar_text(it.at(m.answer));
            out.push_back(std::move(item));
        } catch (const MalformedTable& e) {
            throw MalformedDataset(i, e.what());
        } catch (const nlohmann::json::exception& e) {
            throw MalformedDataset(i, e.what());
        }
    }
    check_unique_ids(out);
    return out;
}

std::vector<DatasetItem> parse_penguins_json(std::string_view text) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw MalformedDataset(0, "file is not valid JSON");
    const auto& items = item_array(doc, {"examples", "items"});
    std::vector<DatasetItem> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        if (!it.is_object() || !it.contains("input")) throw MalformedDataset(i, "missing 'input'");
        const auto input = scalar_text(it.at("input"));

        // The header is the first comma-separated line; rows are later lines
        // with the same number of fields.
        std::vector<std::string> columns;
        std::vector<Row> rows;
        std::vector<std::string> rest;
        for (const auto& line : split_lines(input)) {
            auto fields = split_commas(line);
            if (columns.empty() && fields.size() >= 2 && line.find(':') == std::string::npos &&
                line.find('.') == std::string::npos) {
                columns = fields;
                continue;
            }
            // "...each subsequent line is a penguin:  name, age, ..." puts the
            // header after the preamble on one line.
            if (columns.empty()) {
                const auto colon = line.rfind(':');
                if (colon != std::string::npos) {
                    auto tail = split_commas(std::string_view(line).substr(colon + 1));
                    if (tail.size() >= 2 && line.find('.', colon) == std::string::npos) {
                        columns = std::move(tail);
                        rest.emplace_back(trim(std::string_view(line).substr(0, colon + 1)));
                        continue;
                    }
                }
            }
            if (!columns.empty() && fields.size() == columns.size() && line.find(':') == std::string::npos &&
                line.find('?') == std::string::npos) {
                Row row;
                for (auto& f : fields) row.emplace_back(std::move(f));
                rows.push_back(std::move(row));
                continue;
            }
            if (!trim(line).empty()) rest.emplace_back(trim(line));
        }
        if (columns.empty()) throw MalformedDataset(i, "no table found in input");

        DatasetItem item;
        try {
            item.table = Table(columns, std::move(rows), "penguins");
        } catch (const MalformedTable& e) {
            throw MalformedDataset(i, e.what());
        }
        for (std::size_t k = 0; k < rest.size(); ++k) {
            if (k) item.question.text += "\n";
            item.question.text += rest[k];
        }
        item.question.id = it.contains("id") ? scalar_text(it.at("id")) : default_id(i);

        if (it.contains("target")) {
            const auto& t = it.at("target");
            item.gold = t.is_array() && !t.empty() ? scalar_text(t[0]) : scalar_text(t);
        } else if (it.contains("answer")) {
            item.gold = scalar_text(it.at("answer"));
        } else if (it.contains("target_scores") && it.at("target_scores").is_object()) {
            double best = -1e300;
            for (const auto& [option, s] : it.at("target_scores").items()) {
                if (s.is_number() && s.get<double>() > best) {
                    best = s.get<double>();
                    item.gold = option;
                }
            }
        } else {
            throw MalformedDataset(i, "missing 'target'");
        }
        out.push_back(std::move(item));
    }
    check_unique_ids(out);
    return out;
}

std::vector<DatasetItem> load_dataset(const DatasetSpec& spec) {
    const auto text = read_file(spec.path);
    std::vector<DatasetItem> items;
    switch (spec.format) {
        case DatasetFormat::GenericJson: items = parse_generic_json(text); break;
        case DatasetFormat::TableBenchJsonl: items = parse_tablebench_jsonl(text, spec.manifest); break;
        case DatasetFormat::PenguinsJson: items = parse_penguins_json(text); break;
    }
    if (spec.include_categories.empty() && spec.exclude_categories.empty()) return items;
    std::vector<DatasetItem> kept;
    for (auto& item : items) {
        const std::string category = item.question.category.value_or("");
        if (!spec.include_categories.empty() && !spec.include_categories.count(category)) continue;
        if (spec.exclude_categories.count(category)) continue;
        kept.push_back(std::move(item));
    }
    return kept;
}

}  // namespace tabagent
