#pragma once

#include <cstddef>
#include <functional>

namespace equideg {

// Worker count: EQUIDEG_THREADS if set and positive, else hardware
// concurrency (at least 1).
unsigned thread_budget();

// Runs body(i) for i in [0, count) on up to thread_budget() threads. Each
// index is visited exactly once; the first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace equideg
