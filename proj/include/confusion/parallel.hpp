#pragma once

#include <cstddef>
#include <functional>

namespace confusion {

// Process-wide worker cap. 0 means hardware concurrency. Results never
// depend on it; only wall time does.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0,n). Each index is independent; fn must write only
// to its own slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace confusion
