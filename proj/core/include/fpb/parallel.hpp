#pragma once

#include <cstddef>
#include <functional>

namespace fpb {

/// Process-wide worker count used by parallel_for. Defaults to 1.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Work is
/// split into contiguous chunks; the first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fpb
