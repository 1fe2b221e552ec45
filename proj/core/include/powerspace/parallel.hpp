#pragma once

#include <cstddef>
#include <functional>

namespace powerspace {

/// Number of worker threads used by library loops. Defaults to the value of
/// POWERSPACE_THREADS when set, otherwise 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write results into per-index slots so the outcome does not depend on the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace powerspace
