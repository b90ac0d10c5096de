#include "volharness/numfmt.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace volharness {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
    if (!std::isfinite(value)) return format_double(value);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    std::string s = buf;
    if (!s.empty() && s[0] == '-' && std::strtod(s.c_str(), nullptr) == 0.0) s.erase(0, 1);
    return s;
}

}  // namespace volharness
