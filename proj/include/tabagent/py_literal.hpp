#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tabagent::py {

/// Python's repr() of a float: shortest round-trip digits, fixed notation for
/// decimal exponents in [-4, 16), ".0" on integral values.
std::string repr(double value);

/// Python's repr() of a str (quote choice and escapes as CPython does for
/// ASCII; other bytes pass through).
std::string repr(std::string_view text);

/// Integral finite values print without a fractional part ("84" rather than
/// "84.0"); everything else uses repr().
std::string minimal_number(double value);

/// One element of a parsed result set. Numbers keep their source text.
struct Scalar {
    enum class Kind { Integer, Float, String, None };
    Kind kind = Kind::None;
    std::string text;

    friend bool operator==(const Scalar&, const Scalar&) = default;
};

using Rows = std::vector<std::vector<Scalar>>;

/// Parses the list-of-lists rendering produced for SQL result sets, e.g.
/// "[[-4]]" or "[['a', 1.5], ['b', None]]". Returns nullopt on anything else.
std::optional<Rows> parse_rows(std::string_view text);

std::string render_rows(const Rows& rows);

/// Renders one scalar for use as an answer: strings unquoted, floats minimal.
std::string answer_text(const Scalar& scalar);

}  // namespace tabagent::py
