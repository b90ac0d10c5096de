#pragma once

#include <string>

namespace volharness {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Fixed notation with `digits` decimals, used for human-facing tables.
std::string format_fixed(double value, int digits);

}  // namespace volharness
