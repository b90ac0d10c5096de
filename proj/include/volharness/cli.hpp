#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volharness {

/// Entry point behind the `volharness` binary. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace volharness
