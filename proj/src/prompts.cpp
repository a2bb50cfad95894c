#include "tabagent/prompts.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "tabagent/py_literal.hpp"
#include "tabagent/sql_engine.hpp"

namespace tabagent::prompts {

namespace {

constexpr std::string_view kCotFewShot = R"FEW(Read the following table and then write solution texts to answer a question:
| Name     | Number of coins |
|----------|-----------------|
| Braden   | 76              |
| Camilla  | 94              |
| Rick     | 86              |
| Mary     | 84              |
| Hector   | 80              |
| Devin    | 83              |
| Emily    | 82              |
| Avery    | 87              |

Question: Some friends discussed the sizes of their coin collections. What is the mean of the numbers?
## Return a query for the solution and answer with two keys: solution and answer. Respond using JSON only.

{'solution': "To find the mean, we sum up the numbers of coins for all the individuals and then divide the total by the number of individuals.
Step 1: Add all the numbers of coins: 76 + 94 + 86 + 84 + 80 + 83 + 82 + 87 = 672
Step 2: Count the number of individuals: There are 8 individuals.
Step 3: Calculate the mean: Mean = Total sum of coins / Number of individuals = 672/8 = 84", 'answer': 84}

Read the following table and then write solution texts to answer a question:
| Price  | Quantity demanded | Quantity supplied |
|--------|-------------------|-------------------|
| $155   | 22,600            | 5,800            |
| $275   | 20,500            | 9,400            |
| $395   | 18,400            | 13,000           |
| $515   | 16,300            | 16,600           |
| $635   | 14,200            | 20,200           |

Question: Look at the table. Then answer the question. At a price of $155, is there a shortage or a surplus?
## Return a query for the solution and answer with two keys: solution and answer. Respond using JSON only.

{'solution': "To determine if there is a 'shortage' or a 'surplus', we compare the 'quantity demanded' and the 'quantity supplied' at the given price.
Step 1:
Identify the values from the table for $155:
- Quantity demanded = 22,600
- Quantity supplied = 5,800
Step 2:
Calculate the difference:
Shortage or Surplus = Quantity demanded - Quantity supplied = 22,600 - 5,800 = 16,800
Step 3: Determine the situation:
Since the quantity demanded is greater than the quantity supplied, there is a 'shortage' of 16,800 units.", 'answer': 'shortage'}

Read the following table and then write solution texts to answer a question:
| Name     | Number |
|----------|--------|
| Samir    | 7      |
| Kristen  | 4      |
| Dakota   | 7      |
| Jamie    | 8      |
| Maggie   | 9      |

Question: Samir's class recorded how many cans of food each student collected for their canned food drive. What is the median of the numbers?
## Return a query for the solution and answer with two keys: solution and answer. Respond using JSON only.

{'solution': "To find the median, we need to arrange the numbers in order from smallest to largest and then identify the middle number.
Step 1: Arrange the numbers: 4, 7, 7, 8, 9
Step 2: Identify the middle number. Since there are 5 numbers (an odd count), the middle number is the third number. So the median is 7.", 'answer': 7}

Read the following table and then write solution texts to answer a question:
| Toy                     | Price  |
|---------|--------|
| toy boat                | $5.54  |
| toy guitar              | $8.23  |
| set of juggling balls   | $5.01  |
| trivia game             | $8.18  |
| jigsaw puzzle           | $5.30  |
| toy dinosaur            | $3.00  |

Question: Lorenzo has $13.50. Does he have enough to buy a toy guitar and a set of juggling balls?
## Return a query for the solution and answer with two keys: solution and answer. Respond using JSON only.

{'solution': "To determine if Lorenzo can afford both the toy guitar and the set of juggling balls, we need to calculate their combined cost and compare it to Lorenzo's available money.
Step 1: Identify the prices:
- Toy guitar = $8.23
- Set of juggling balls = $5.01
Step 2: Calculate the total cost:
Total cost = 8.23 + 5.01 = 13.24
Step 3: Compare the total cost to Lorenzo's money. Lorenzo has $13.50, and the total cost is $13.24. Since $13.24 is less than $13.50, Lorenzo does have enough money.", 'answer': 'Yes'})FEW";

constexpr std::string_view kPotFewShot = R"FEW(Read the following table and then write Python code with pandas to answer a question:

import pandas as pd
data = {
'Name': ['Braden', 'Camilla', 'Rick', 'Mary', 'Hector', 'Devin', 'Emily', 'Avery'],
'Number of coins': [76, 94, 86, 84, 80, 83, 82, 87]
}
df = pd.DataFrame(data)

Question: Some friends discussed the sizes of their coin collections. What is the mean of the numbers?
## You don’t need to reprint pre-written code like 'import pandas as pd', 'data = {...}', or 'df = pd.DataFrame(data)'. That code will be provided separately, so just give me the code that processes 'data' and 'df'.
## Return a query for the 'python code with pandas which return ans' with one key: code. Respond using JSON only.

{'code' : '''# Calculate the mean of the 'Number of coins' column
mean_coins = df['Number of coins'].mean()
ans = mean_coins'''}

Read the following table and then write Python code with pandas to answer a question:

import pandas as pd
data = {
    'Price': [155, 275, 395, 515, 635],
    'Quantity demanded': [22600, 20500, 18400, 16300, 14200],
    'Quantity supplied': [5800, 9400, 13000, 16600, 20200]
}
df = pd.DataFrame(data)

Question: Look at the table. Then answer the question. At a price of $155, is there a shortage or a surplus?
## You don’t need to reprint pre-written code like 'import pandas as pd', 'data = {...}', or 'df = pd.DataFrame(data)'. That code will be provided separately, so just give me the code that processes 'data' and 'df'.
## Return a query for the 'python code with pandas which return ans' with one key: code. Respond using JSON only.

{'code' : '''# Filter the row where the price is $155
price_155 = df[df['Price'] == 155]
# Calculate shortage or surplus
quantity_demanded = price_155['Quantity demanded'].values[0]
quantity_supplied = price_155['Quantity supplied'].values[0]
if quantity_demanded > quantity_supplied:
    ans = 'shortage'
else:
    ans = 'surplus' '''}

Read the following table and then write Python code with pandas to answer a question:

import pandas as pd
data = {
    'Name': ['Samir', 'Kristen', 'Dakota', 'Jamie', 'Maggie'],
    'Cans collected': [7, 4, 7, 8, 9]
}
df = pd.DataFrame(data)

Question: Samir's class recorded how many cans of food each student collected for their canned food drive. What is the median of the numbers?
## You don’t need to reprint pre-written code like 'import pandas as pd', 'data = {...}', or 'df = pd.DataFrame(data)'. That code will be provided separately, so just give me the code that processes 'data' and 'df'.
## Return a query for the 'python code with pandas which return ans' with one key: code. Respond using JSON only.

{'code' : '''# Calculate the median of the 'Cans collected' column
median_cans = df['Cans collected'].median()
ans = median_cans'''}

Read the following table and then write Python code with pandas to answer a question:

import pandas as pd
data = {
    'Toy': ['toy boat', 'toy guitar', 'set of juggling balls', 'trivia game', 'jigsaw puzzle', 'toy dinosaur'],
    'Price': [5.54, 8.23, 5.01, 8.18, 5.30, 3.00]
}
df = pd.DataFrame(data)

Question: Lorenzo has $13.50. Does he have enough to buy a toy guitar and a set of juggling balls?
## You don’t need to reprint pre-written code like 'import pandas as pd', 'data = {...}', or 'df = pd.DataFrame(data)'. That code will be provided separately, so just give me the code that processes 'data' and 'df'.
## Return a query for the 'python code with pandas which return ans' with one key: code. Respond using JSON only.

{'code' : '''# Lorenzo's total money
total_money = 13.50

# Filter the prices of 'toy guitar' and 'set of juggling balls'
selected_items = df[df['Toy'].isin(['toy guitar', 'set of juggling balls'])]

# Calculate the total cost
total_cost = selected_items['Price'].sum()

# Determine if Lorenzo has enough money
if total_money >= total_cost:
    ans = "yes"
else:
    ans = "no"
'''})FEW";

constexpr std::string_view kPdaFewShot = R"FEW(You are an expert in reviewing and correcting Python code designed to solve questions about tables.
Review the query, the previous pandas code written to address it, and its execution results to identify any parts that need correction.

### query
Read the following table and then write Python code with pandas to answer a question:

import pandas as pd
data = {
    'Toy': ['toy boat', 'toy guitar', 'set of juggling balls', 'trivia game', 'jigsaw puzzle', 'toy dinosaur'],
    'Price': [5.54, 8.23, 5.01, 8.18, 5.30, 3.00]
}
df = pd.DataFrame(data)

Question: What is the average price of toys that cost more than $5?
## You don’t need to reprint pre-written code like 'import pandas as pd', 'data = {...}', or 'df = pd.DataFrame(data)'. That code will be provided separately, so just give me the code that processes 'data' and 'df'.
## Return a query for the python code with pandas which return ans with one key: code. Respond using JSON only. (You must return the value with 'ans’)

### Previous Code:
# The following 4 toys are included :
df_previous = df[df['Toy'].isin([
    'toy boat',
    'toy guitar',
    'set of juggling balls',
    'toy dinosaur'
])]
# Summing the prices
total_previous = df_previous['Price'].sum()
# Counting the number of toys
count_previous = len(df_previous)
# Calculating the average
ans = total_previous / count_previous

### Previous Execution Result:
5.445

### Return a query for 'corrected python code with pandas which return ans' with one key: code. Respond using JSON only. (You must return the value with 'ans')
{'code' : '''
# The toys that will actually be included among those priced greater than $5 are the toy boat, toy guitar, set of juggling balls, trivia game, and jigsaw puzzle.
df_corrected = df[df['Toy'].isin([
    'toy boat',
    'toy guitar',
    'set of juggling balls',
    'trivia game',
    'jigsaw puzzle'
])]
# Summing the prices
total_corrected = df_corrected['Price'].sum()
# Counting the number of toys
count_corrected = len(df_corrected)
# Calculating the average
ans = total_corrected / count_corrected
'''})FEW";

constexpr std::string_view kPdaTail = R"TAIL(### query
{query}

### Previous Code:
{code}

### Previous Execution Result:
{execution_result}

### Return a query for 'corrected python code with pandas which return ans' with one key: code. Respond using JSON only. (You must return the value with 'ans'))TAIL";

constexpr std::string_view kSqlFewShot = R"FEW(Read the following table and then write SQL code to answer the question:

-- Table: coin_collection
-- Columns:
--   Name (TEXT)
--   Number_of_coins (INTEGER)
--
-- Rows:
--   Braden      | 76
--   Camilla     | 94
--   Rick        | 86
--   Mary        | 84
--   Hector      | 80
--   Devin       | 83
--   Emily       | 82
--   Avery       | 87

Question: Some friends discussed the sizes of their coin collections. What is the mean of the numbers?
## Return a query for the 'SQL code' with one key: code. Respond using JSON only.

{'code' : '''
SELECT AVG(Number_of_coins) AS answer
FROM coin_collection;
'''}

Read the following table and then write SQL code to answer the question:

-- Table: market
-- Columns:
--   Price (INTEGER)
--   Quantity_demanded (INTEGER)
--   Quantity_supplied (INTEGER)
--
-- Rows:
--   155    | 22600 | 5800
--   275    | 20500 | 9400
--   395    | 18400 | 13000
--   515    | 16300 | 16600
--   635    | 14200 | 20200

Question: Look at the table. Then answer the question. At a price of $155, is there a shortage or a surplus?
## Return a query for the 'SQL code' with one key: code. Respond using JSON only.

{'code' : '''
SELECT
  CASE
    WHEN Quantity_demanded > Quantity_supplied THEN 'shortage'
    ELSE 'surplus'
  END AS answer
FROM market
WHERE Price = 155;
'''}

Read the following table and then write SQL code to answer the question:

-- Table: can_collection
-- Columns:
--   Name (TEXT)
--   Cans_collected (INTEGER)
--
-- Rows:
--   Samir      | 7
--   Kristen    | 4
--   Dakota     | 7
--   Jamie      | 8
--   Maggie    | 9

Question: Samir's class recorded how many cans of food each student collected for their canned food drive. What is the median of the numbers?
## Return a query for the 'SQL code' with one key: code. Respond using JSON only.

{'code' : '''
SELECT PERCENTILE_CONT(0.5) WITHIN GROUP (ORDER BY Cans_collected) AS answer
FROM can_collection;
'''}

Read the following table and then write SQL code to answer the question:

-- Table: toys
-- Columns:
--   Toy (TEXT)
--   Price (DECIMAL)
--
-- Rows:
--   toy boat              | 5.54
--   toy guitar            | 8.23
--   set of juggling balls | 5.01
--   trivia game         | 8.18
--   jigsaw puzzle       | 5.30
--   toy dinosaur       | 3.00

Question: Lorenzo has $13.50. Does he have enough to buy a toy guitar and a set of juggling balls?
## Return a query for the 'SQL code' with one key: code. Respond using JSON only.

{'code' : '''
SELECT
  CASE
    WHEN SUM(Price) <= 13.50 THEN 'yes'
    ELSE 'no'
  END AS answer
FROM toys
WHERE Toy IN ('toy guitar', 'set of juggling balls');
'''})FEW";

constexpr std::string_view kSdaFewShot = R"FEW(You are an expert in reviewing and correcting SQL code designed to solve questions about tables.
Review the query, the previous SQL code written to address it, and its execution results to identify any parts that need correction.

### query
Read the following table and then write SQL code to answer a question:

-- Table: toys
-- Columns:
--   Toy (TEXT)
--   Price (DECIMAL)

-- Rows:
--   toy boat                   | 5.54
--   toy guitar                 | 8.23
--   set of juggling balls | 5.01
--   trivia game                   | 8.18
--   jigsaw puzzle                 | 5.30
--   toy dinosaur                 | 3.00

Question: What is the average price of toys that cost more than $5?
## Return a query for the 'SQL code' with one key: code. Respond using JSON only.

### Previous Code:
-- The following 4 toys are included:
SELECT AVG(Price) AS ans
FROM toys
WHERE Toy IN ('toy boat', 'toy guitar', 'set of juggling balls', 'toy dinosaur');

### Previous Execution Result:
5.445

### Return a query for 'corrected SQL code' with one key: code. Respond using JSON only.
{'code' : '''
-- The toys that will actually be included among those priced greater than $5 are:
-- toy boat, toy guitar, set of juggling balls, trivia game, jigsaw puzzle.
SELECT AVG(Price) AS ans
FROM toys
WHERE Price > 5;
'''})FEW";

constexpr std::string_view kSdaTail = R"TAIL(### query
{query}

### Previous Code:
{code}

### Previous Execution Result:
{execution_result}

### Return a query for 'corrected SQL code' with one key: code. Respond using JSON only.)TAIL";

constexpr std::string_view kFmFewShot = R"FEW(You are a helpful AI that extracts the key entities from a specific sentence.
For a given question, someone has provided an answer.
However, the answer is too long and verbose, so you need to condense it into a few short entities. Summarize the answer into a few words as entities.

## Return a query for the solution and answer with two keys: Justification and Answer. Respond using JSON only.
- Question: Which country had the highest British exports in 1950, and how does it compare to its British exports in 1942?
- Answer: Sweden had the highest British exports in 1950 with 165.5 million Pounds, which was 72.3 million Pounds higher than its 1942 value of 93.2 million Pounds.
## Return the final output strictly in the following JSON format.
{'Extracted_Answer' : 'Sweden, 72.3'})FEW";

constexpr std::string_view kFmTail = R"TAIL(## Return a query for the solution and answer with two keys: Justification and Answer. Respond using JSON only.
- Question : {Question}
- Answer : {Answer}
## Return the final output strictly in the following JSON format.)TAIL";

constexpr std::string_view kPotInstructions =
    "## You don’t need to reprint pre-written code like 'import pandas as pd', 'data = {...}', or "
    "'df = pd.DataFrame(data)'. That code will be provided separately, so just give me the code that "
    "processes 'data' and 'df'.\n"
    "## Return a query for the 'python code with pandas which return ans' with one key: code. "
    "Respond using JSON only.";

std::string replace_slot(std::string text, std::string_view slot, std::string_view value) {
    const std::string token = "{" + std::string(slot) + "}";
    auto pos = text.find(token);
    if (pos == std::string::npos) throw std::logic_error("template has no slot " + token);
    text.replace(pos, token.size(), value);
    return text;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string sql_cell(const Cell& cell, ColumnType type) {
    if (!cell || classify_cell(cell) == CellKind::Null) return "NULL";
    if (type != ColumnType::Text) {
        if (auto n = numeric_text(*cell)) return *n;
    }
    std::string out;
    for (char c : *cell) out += (c == '\n' || c == '\r') ? ' ' : c;
    return out;
}

std::string result_text(const ExecutionResult& result) {
    return result.payload.empty() && !result.ok() ? std::string(to_string(result.kind)) : result.payload;
}

}  // namespace

const PromptTemplate& template_for(AgentRole role) {
    static const std::vector<PromptTemplate> templates = {
        {AgentRole::CoTA, kCotFewShot, {"query"}, {"solution", "answer"}},
        {AgentRole::PoTA, kPotFewShot, {"query"}, {"code"}},
        {AgentRole::t2SA, kSqlFewShot, {"query"}, {"code"}},
        {AgentRole::PDA, kPdaFewShot, {"query", "code", "execution_result"}, {"code"}},
        {AgentRole::SDA, kSdaFewShot, {"query", "code", "execution_result"}, {"code"}},
        {AgentRole::JA, {}, {"question", "table", "candidates"}, {"answer"}},
        {AgentRole::FM, kFmFewShot, {"Question", "Answer"}, {"Extracted_Answer"}},
    };
    for (const auto& t : templates) {
        if (t.role == role) return t;
    }
    throw std::logic_error("no template for role");
}

std::string python_cell(const Cell& cell, ColumnType type) {
    if (!cell || classify_cell(cell) == CellKind::Null) return "''";
    if (type != ColumnType::Text) {
        if (auto n = numeric_text(*cell)) return *n;
    }
    return py::repr(std::string_view(*cell));
}

std::string dataframe_preamble(const Table& table) {
    const auto types = infer_column_types(table);
    std::string out = "import pandas as pd\ndata = {\n";
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        out += "    " + py::repr(std::string_view(table.columns()[c])) + ": [";
        for (std::size_t r = 0; r < table.row_count(); ++r) {
            if (r) out += ", ";
            out += python_cell(table.rows()[r][c], types[c]);
        }
        out += "]";
        if (c + 1 < table.column_count()) out += ",";
        out += "\n";
    }
    out += "}\ndf = pd.DataFrame(data)";
    return out;
}

std::string sql_schema_comment(const Table& table) {
    const auto types = infer_column_types(table);
    const auto ids = sanitize_headers(table.columns());
    std::string out = "-- Table: " + std::string(kRelationName) + "\n-- Columns:\n";
    for (std::size_t c = 0; c < ids.size(); ++c) {
        out += "--   " + ids[c] + " (" + std::string(sql_type_name(types[c])) + ")\n";
    }
    out += "--\n-- Rows:";

    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> widths(ids.size(), 0);
    for (const auto& row : table.rows()) {
        std::vector<std::string> line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line.push_back(sql_cell(row[c], types[c]));
            widths[c] = std::max(widths[c], line.back().size());
        }
        cells.push_back(std::move(line));
    }
    for (const auto& line : cells) {
        out += "\n--   ";
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) out += " | ";
            out += c + 1 < line.size() ? pad_right(line[c], widths[c]) : line[c];
        }
    }
    return out;
}

std::string cot_query(const Table& table, const Question& question) {
    return "Read the following table and then write solution texts to answer a question:\n" +
           table_to_markdown(table) + "\n\nQuestion: " + question.text +
           "\n## Return a query for the solution and answer with two keys: solution and answer. "
           "Respond using JSON only.";
}

std::string pot_query(const Table& table, const Question& question) {
    return "Read the following table and then write Python code with pandas to answer a question:\n\n" +
           dataframe_preamble(table) + "\n\nQuestion: " + question.text + "\n" + std::string(kPotInstructions);
}

std::string sql_query(const Table& table, const Question& question) {
    return "Read the following table and then write SQL code to answer the question:\n\n" +
           sql_schema_comment(table) + "\n\nQuestion: " + question.text +
           "\n## Return a query for the 'SQL code' with one key: code. Respond using JSON only.";
}

std::string cot_prompt(const Table& table, const Question& question) {
    return std::string(kCotFewShot) + "\n\n" + cot_query(table, question);
}

std::string pot_prompt(const Table& table, const Question& question) {
    return std::string(kPotFewShot) + "\n\n" + pot_query(table, question);
}

std::string sql_prompt(const Table& table, const Question& question) {
    return std::string(kSqlFewShot) + "\n\n" + sql_query(table, question);
}

std::string debug_prompt(AgentRole role, const Table& table, const Question& question,
                         std::string_view code, std::string_view execution_result) {
    std::string_view few_shot;
    std::string_view tail;
    std::string query;
    if (role == AgentRole::PDA) {
        few_shot = kPdaFewShot;
        tail = kPdaTail;
        query = pot_query(table, question);
    } else if (role == AgentRole::SDA) {
        few_shot = kSdaFewShot;
        tail = kSdaTail;
        query = sql_query(table, question);
    } else {
        throw std::invalid_argument("debug_prompt needs PDA or SDA");
    }
    // Fill the last slot first so inserted text cannot be mistaken for a slot.
    std::string filled(tail);
    filled = replace_slot(std::move(filled), "execution_result", execution_result);
    filled = replace_slot(std::move(filled), "code", code);
    filled = replace_slot(std::move(filled), "query", query);
    return std::string(few_shot) + "\n\n" + filled;
}

std::string format_matcher_prompt(const Question& question, std::string_view answer) {
    std::string filled(kFmTail);
    filled = replace_slot(std::move(filled), "Answer", answer);
    filled = replace_slot(std::move(filled), "Question", question.text);
    return std::string(kFmFewShot) + "\n\n" + filled;
}

std::string judge_prompt(const Table& table, const Question& question,
                         const std::vector<JudgeEvidence>& evidence,
                         const std::optional<ConfidenceVector>& scores) {
    std::string out =
        "You are a judge choosing the final answer to a question about a table. Several methods "
        "produced candidate answers. Review the table, the question and each method's work, then give "
        "the answer you believe is correct.\n\n### Table\n" +
        table_to_markdown(table) + "\n\n### Question\n" + question.text + "\n";

    for (const auto& e : evidence) {
        out += "\n### Candidate: " + std::string(to_string(e.path)) + "\n";
        if (e.path == Path::CoT) {
            out += "Solution:\n" + (e.solution.empty() ? std::string(kNothingToken) : e.solution) + "\n";
        } else if (e.iterations.empty()) {
            out += "Code:\n" + std::string(kNothingToken) + "\n";
        } else {
            const std::size_t first = e.iterations.size() > 2 ? e.iterations.size() - 2 : 0;
            for (std::size_t k = first; k < e.iterations.size(); ++k) {
                out += "Code (iteration " + std::to_string(k) + "):\n" + e.iterations[k].code + "\n";
                out += "Execution result (iteration " + std::to_string(k) + "):\n" +
                       result_text(e.iterations[k].result) + "\n";
            }
        }
        out += "Answer: " + e.answer + "\n";
    }

    if (scores) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "CoT: %.4f, PoT: %.4f, text2SQL: %.4f", scores->cot, scores->pot,
                      scores->sql);
        out += "\n### Confidence scores\n" + std::string(buf) + "\n";
    }
    out += "\n## Return the final answer with one key: answer. Respond using JSON only.";
    return out;
}

}  // namespace tabagent::prompts
