#pragma once

#include <cstddef>
#include <functional>

namespace kamforge {

/// Worker count: KAMFORGE_THREADS if set (>= 1), otherwise the hardware count.
int thread_count();
/// Overrides the worker count for this process; 0 restores the default.
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n). Indices are split into contiguous blocks, one per
/// worker, so results written per index do not depend on the worker count.
/// The first exception thrown by any fn is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace kamforge
