#ifndef EXACTCP_PARALLEL_HPP
#define EXACTCP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace exactcp {

// EXACTCP_THREADS if set to a positive integer, else the hardware thread count.
std::size_t worker_count();

// Runs task(i) for i in [0, count). Tasks must not share mutable state.
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace exactcp

#endif
