#pragma once

#include <cstddef>
#include <functional>

namespace fairalloc {

/// Worker count: hardware concurrency, capped by FAIRALLOC_THREADS when set.
std::size_t worker_count();

/// Runs body(0..count-1) across worker_count() threads. Runs are independent;
/// the exception from the lowest failing index is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fairalloc
