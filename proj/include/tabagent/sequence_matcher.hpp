#pragma once

#include <cstddef>
#include <string_view>

namespace tabagent {

/// Total length of the matching blocks found by Ratcliff-Obershelp: take the
/// longest common block (earliest in `a`, then earliest in `b` on ties) and
/// recurse on the unmatched pieces to its left and right. No junk heuristics.
std::size_t matching_characters(std::string_view a, std::string_view b);

/// 2M / (|a| + |b|); 1.0 when both are empty.
double sequence_ratio(std::string_view a, std::string_view b);

}  // namespace tabagent
