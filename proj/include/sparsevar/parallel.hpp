#pragma once

#include <cstddef>
#include <functional>

namespace sparsevar {

// Worker count from SPARSEVAR_THREADS, falling back to the hardware
// concurrency. Always at least 1.
unsigned thread_count();

// Runs body(i) for i in [0, count) on up to thread_count() workers. The
// first exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sparsevar
