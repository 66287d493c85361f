#pragma once

#include <cstddef>
#include <functional>

namespace spectral {

/// Worker count: SPECTRAL_CORNER_THREADS if set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
std::size_t thread_budget();

/// Runs body(i) for i in [0, n) on up to thread_budget() threads. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spectral
