#pragma once

#include <cstddef>
#include <functional>

namespace orthoconv {

/// Worker count: hardware concurrency capped by ORTHOCONV_THREADS (>= 1).
std::size_t thread_budget();

/// Runs fn(0..n-1) across the thread budget. Work items must be independent;
/// each index writes only its own output slot, so results are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace orthoconv
