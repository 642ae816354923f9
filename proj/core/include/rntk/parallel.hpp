#pragma once

#include <cstddef>
#include <functional>

namespace rntk {

/// Worker count: RNTK_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Calls body(i) for every i in [0, count), spread over worker_count()
/// threads in contiguous chunks. The first exception thrown by any call is
/// rethrown on the calling thread after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace rntk
