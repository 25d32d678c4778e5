#ifndef SPQ_PARALLEL_HPP
#define SPQ_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace spq {

/// Thread count from SPQ_THREADS, else 1.
unsigned default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` threads. If any body
/// throws, the exception from the smallest failing i is rethrown after the
/// workers join, matching the serial loop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace spq

#endif  // SPQ_PARALLEL_HPP
