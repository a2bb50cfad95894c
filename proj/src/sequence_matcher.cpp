#include "tabagent/sequence_matcher.hpp"

#include <array>
#include <tuple>
#include <vector>

namespace tabagent {

namespace {

struct Block {
    std::size_t i, j, size;
};

class Matcher {
public:
    Matcher(std::string_view a, std::string_view b)
        : a_(a), b_(b), run_(b.size() + 1, 0), next_run_(b.size() + 1, 0) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            positions_[static_cast<unsigned char>(b[j])].push_back(j);
        }
    }

    // Dynamic program over diagonals: run_[j + 1] is the length of the match
    // ending at (i - 1, j).
    Block longest(std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) {
        Block best{alo, blo, 0};
        std::vector<std::size_t> touched;
        std::vector<std::size_t> next_touched;
        for (std::size_t i = alo; i < ahi; ++i) {
            next_touched.clear();
            for (std::size_t j : positions_[static_cast<unsigned char>(a_[i])]) {
                if (j < blo) continue;
                if (j >= bhi) break;
                std::size_t k = run_[j] + 1;
                next_run_[j + 1] = k;
                next_touched.push_back(j + 1);
                if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
            }
            for (std::size_t t : touched) run_[t] = 0;
            for (std::size_t t : next_touched) {
                run_[t] = next_run_[t];
                next_run_[t] = 0;
            }
            std::swap(touched, next_touched);
        }
        for (std::size_t t : touched) run_[t] = 0;
        return best;
    }

    std::size_t total() {
        std::size_t sum = 0;
        std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> stack;
        stack.emplace_back(0, a_.size(), 0, b_.size());
        while (!stack.empty()) {
            auto [alo, ahi, blo, bhi] = stack.back();
            stack.pop_back();
            Block m = longest(alo, ahi, blo, bhi);
            if (m.size == 0) continue;
            sum += m.size;
            if (alo < m.i && blo < m.j) stack.emplace_back(alo, m.i, blo, m.j);
            if (m.i + m.size < ahi && m.j + m.size < bhi) {
                stack.emplace_back(m.i + m.size, ahi, m.j + m.size, bhi);
            }
        }
        return sum;
    }

private:
    std::string_view a_;
    std::string_view b_;
    std::array<std::vector<std::size_t>, 256> positions_;
    std::vector<std::size_t> run_;
    std::vector<std::size_t> next_run_;
};

}  // namespace

std::size_t matching_characters(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) return 0;
    return Matcher(a, b).total();
}

double sequence_ratio(std::string_view a, std::string_view b) {
    const std::size_t length = a.size() + b.size();
    if (length == 0) return 1.0;
    return 2.0 * static_cast<double>(matching_characters(a, b)) / static_cast<double>(length);
}

}  // namespace tabagent
