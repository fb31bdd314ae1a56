#pragma once

#include <cstddef>
#include <functional>

namespace bellforge {

// Worker count: BELLFORGE_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

// Calls body(i) for every i in [0, n). Work is split into contiguous static
// chunks; body must only write state owned by index i, so results do not
// depend on the number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace bellforge
