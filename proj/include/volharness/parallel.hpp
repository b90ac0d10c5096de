#pragma once

#include <cstddef>
#include <functional>

namespace volharness {

/// Worker count: VOLHARNESS_THREADS if set and positive, else hardware
/// concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; the
/// caller writes results into preallocated per-index slots so output does
/// not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace volharness
