#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabagent/table.hpp"

namespace tabagent {

enum class DatasetFormat { GenericJson, TableBenchJsonl, PenguinsJson };

std::optional<DatasetFormat> parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format);

/// Field names for TableBench-style JSONL records. Defaults match the public
/// release: the table object holds "columns" and "data".
struct TableBenchManifest {
    std::string id = "id";
    std::string question = "question";
    std::string answer = "answer";
    std::string table = "table";
    std::string category = "qsubtype";
    std::string columns = "columns";
    std::string rows = "data";

    /// Any subset of the keys above; unknown keys throw ConfigError.
    static TableBenchManifest from_json(const nlohmann::json& spec);
};

struct DatasetSpec {
    DatasetFormat format = DatasetFormat::GenericJson;
    std::string path;
    std::set<std::string> include_categories;  // empty keeps every category
    std::set<std::string> exclude_categories;
    TableBenchManifest manifest;
};

struct DatasetItem {
    Table table;
    Question question;
    std::string gold;
};

/// Throws MalformedDataset (with the item index or line number) on bad items
/// or duplicate ids, and ConfigError when the file cannot be read. Items
/// without an id get "q<index>".
std::vector<DatasetItem> load_dataset(const DatasetSpec& spec);

/// Parsers over in-memory text, used by load_dataset.
std::vector<DatasetItem> parse_generic_json(std::string_view text);
std::vector<DatasetItem> parse_tablebench_jsonl(std::string_view text, const TableBenchManifest& manifest);
std::vector<DatasetItem> parse_penguins_json(std::string_view text);

/// JSON scalar to cell text: strings verbatim, integers in decimal, floats as
/// Python would print them, booleans as True/False, null as a missing cell.
Cell json_cell(const nlohmann::json& value);

}  // namespace tabagent
