#pragma once

#include <cstddef>
#include <functional>

namespace ecp {

/// Number of worker threads: COPULA_PROC_THREADS if set (0 = auto),
/// otherwise hardware concurrency. Overridable in-process for tests.
unsigned thread_budget();
void set_thread_budget(unsigned n);  // 0 restores the environment default

/// Runs fn(i) for i in [0, count). Tasks must write only to index-addressed
/// slots and draw randomness only from seeds derived from their own index;
/// under that contract the result is identical for any thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace ecp
