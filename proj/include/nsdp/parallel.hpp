#pragma once

#include <cstddef>
#include <functional>

namespace nsdp {

/// Worker count used by ensemble and grid loops (0 = hardware concurrency).
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over contiguous static chunks. Each index is
/// processed exactly once and writes only its own outputs, so results do not
/// depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nsdp
