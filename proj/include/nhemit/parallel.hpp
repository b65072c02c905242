#pragma once

#include <cstddef>
#include <functional>

namespace nhemit {

// Worker count: NH_EMITTERS_JOBS if set, otherwise the hardware concurrency.
int jobs();
void set_jobs(int n);

// Runs body(i) for i in [0, n) on up to jobs() threads. The first exception
// thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nhemit
