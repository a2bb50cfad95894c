#include "tabagent/py_literal.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace tabagent::py {

std::string repr(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";

    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific);
    std::string sci(buf, end);  // e.g. "-8.4e+01"

    bool negative = false;
    std::size_t pos = 0;
    if (sci[pos] == '-') {
        negative = true;
        ++pos;
    }
    const std::size_t e = sci.find('e');
    std::string digits;
    for (std::size_t i = pos; i < e; ++i) {
        if (sci[i] != '.') digits.push_back(sci[i]);
    }
    const int exponent = std::atoi(sci.c_str() + e + 1);
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

    std::string out = negative ? "-" : "";
    if (exponent >= -4 && exponent < 16) {
        const int point = exponent + 1;  // digits before the decimal point
        if (point <= 0) {
            out += "0.";
            out.append(static_cast<std::size_t>(-point), '0');
            out += digits;
        } else if (static_cast<std::size_t>(point) >= digits.size()) {
            out += digits;
            out.append(static_cast<std::size_t>(point) - digits.size(), '0');
            out += ".0";
        } else {
            out += digits.substr(0, static_cast<std::size_t>(point));
            out += '.';
            out += digits.substr(static_cast<std::size_t>(point));
        }
        return out;
    }
    out += digits.substr(0, 1);
    if (digits.size() > 1) {
        out += '.';
        out += digits.substr(1);
    }
    char exp_buf[16];
    std::snprintf(exp_buf, sizeof(exp_buf), "e%c%02d", exponent < 0 ? '-' : '+', std::abs(exponent));
    out += exp_buf;
    return out;
}

std::string repr(std::string_view text) {
    const bool has_single = text.find('\'') != std::string_view::npos;
    const bool has_double = text.find('"') != std::string_view::npos;
    const char quote = (has_single && !has_double) ? '"' : '\'';
    std::string out(1, quote);
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (c == quote || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\r') {
            out += "\\r";
        } else if (c == '\t') {
            out += "\\t";
        } else if (u < 0x20 || u == 0x7f) {
            char esc[8];
            std::snprintf(esc, sizeof(esc), "\\x%02x", u);
            out += esc;
        } else {
            out += c;
        }
    }
    out += quote;
    return out;
}

std::string minimal_number(double value) {
    if (std::isfinite(value) && value == std::floor(value)) {
        char buf[400];
        std::snprintf(buf, sizeof(buf), "%.0f", value);
        std::string out = buf;
        return out == "-0" ? "0" : out;
    }
    return repr(value);
}

namespace {

class RowsParser {
public:
    explicit RowsParser(std::string_view text) : s_(text) {}

    std::optional<Rows> parse() {
        Rows rows;
        skip();
        if (!eat('[')) return std::nullopt;
        skip();
        if (eat(']')) return finish(std::move(rows));
        for (;;) {
            auto row = parse_row();
            if (!row) return std::nullopt;
            rows.push_back(std::move(*row));
            skip();
            if (eat(']')) return finish(std::move(rows));
            if (!eat(',')) return std::nullopt;
            skip();
        }
    }

private:
    std::optional<Rows> finish(Rows rows) {
        skip();
        if (i_ != s_.size()) return std::nullopt;
        return rows;
    }

    std::optional<std::vector<Scalar>> parse_row() {
        // Rows may be lists or tuples.
        char close;
        if (eat('[')) {
            close = ']';
        } else if (eat('(')) {
            close = ')';
        } else {
            return std::nullopt;
        }
        std::vector<Scalar> row;
        skip();
        if (eat(close)) return row;
        for (;;) {
            skip();
            auto scalar = parse_scalar();
            if (!scalar) return std::nullopt;
            row.push_back(std::move(*scalar));
            skip();
            if (eat(close)) return row;
            if (!eat(',')) return std::nullopt;
            skip();
            if (close == ')' && eat(')')) return row;  // 1-tuple "(x,)"
        }
    }

    std::optional<Scalar> parse_scalar() {
        if (i_ >= s_.size()) return std::nullopt;
        char c = s_[i_];
        if (c == '\'' || c == '"') return parse_string(c);
        if (s_.substr(i_, 4) == "None") {
            i_ += 4;
            return Scalar{Scalar::Kind::None, "None"};
        }
        std::size_t start = i_;
        while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != ']' && s_[i_] != ')' && s_[i_] != ' ') ++i_;
        std::string token(s_.substr(start, i_ - start));
        if (token.empty()) return std::nullopt;
        if (token == "nan" || token == "inf" || token == "-inf") return Scalar{Scalar::Kind::Float, token};
        bool is_float = token.find_first_of(".eE") != std::string::npos;
        char* end = nullptr;
        std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size()) return std::nullopt;
        return Scalar{is_float ? Scalar::Kind::Float : Scalar::Kind::Integer, token};
    }

    std::optional<Scalar> parse_string(char quote) {
        ++i_;
        std::string out;
        while (i_ < s_.size() && s_[i_] != quote) {
            char c = s_[i_++];
            if (c != '\\') {
                out += c;
                continue;
            }
            if (i_ >= s_.size()) return std::nullopt;
            char e = s_[i_++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 't': out += '\t'; break;
                case 'x': {
                    if (i_ + 2 > s_.size()) return std::nullopt;
                    out += static_cast<char>(std::strtol(std::string(s_.substr(i_, 2)).c_str(), nullptr, 16));
                    i_ += 2;
                    break;
                }
                default: out += e;
            }
        }
        if (!eat(quote)) return std::nullopt;
        return Scalar{Scalar::Kind::String, std::move(out)};
    }

    void skip() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\n' || s_[i_] == '\t')) ++i_;
    }

    bool eat(char c) {
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

}  // namespace

std::optional<Rows> parse_rows(std::string_view text) { return RowsParser(text).parse(); }

std::string render_rows(const Rows& rows) {
    std::string out = "[";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r) out += ", ";
        out += '[';
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c) out += ", ";
            const auto& s = rows[r][c];
            if (s.kind == Scalar::Kind::String) out += repr(s.text);
            else if (s.kind == Scalar::Kind::None) out += "None";
            else out += s.text;
        }
        out += ']';
    }
    out += ']';
    return out;
}

std::string answer_text(const Scalar& scalar) {
    if (scalar.kind == Scalar::Kind::Float) {
        char* end = nullptr;
        double v = std::strtod(scalar.text.c_str(), &end);
        if (end == scalar.text.c_str() + scalar.text.size()) return minimal_number(v);
    }
    return scalar.text;
}

}  // namespace tabagent::py
