#pragma once

#include <cstddef>
#include <functional>

namespace blend {

// n <= 0 selects the hardware concurrency; the default is 1.
void set_thread_count(int n);
int thread_count();

// Calls fn(i) for i in [0, n). Work is split into contiguous chunks; callers
// write results by index so outputs never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace blend
