#pragma once

#include <cstddef>
#include <functional>

namespace klrlab {

/// Worker count used by parallel loops. Defaults to the KLRLAB_THREADS
/// environment variable when set, otherwise the hardware concurrency.
std::size_t thread_count();

/// Overrides the worker count for the current process (0 restores the default).
void set_thread_count(std::size_t count);

/// Runs body(i) for every i in [begin, end) over contiguous chunks. Callers
/// write results into per-index slots and reduce afterwards in index order, so
/// outputs never depend on scheduling.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace klrlab
