#pragma once

#include <cstddef>
#include <functional>

namespace senssolve {

// Worker count: SENSSOLVE_THREADS if set and positive, else the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads. Results
// must be written by index so the outcome is independent of scheduling. The
// first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace senssolve
