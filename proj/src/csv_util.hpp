#pragma once

// Small helpers shared by the CSV readers and writers.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace volharness::detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char delim = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <typename Int>
std::optional<Int> parse_integer(std::string_view s) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace volharness::detail
