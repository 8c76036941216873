#pragma once

// Block-partitioned parallel_for over std::thread. Callers are responsible
// for writing to disjoint outputs; results must not depend on the thread
// count (slot-indexed writes plus a sequential reduction is the pattern
// used throughout).

#include <cstdint>
#include <functional>

namespace phidro::par {

int max_threads();
void set_max_threads(int n);

// Invokes fn(begin, end) on contiguous index blocks covering [0, n).
void parallel_for_blocks(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

// Invokes fn(i) for each i in [0, n).
template <class F>
void parallel_for(std::int64_t n, F&& fn) {
  parallel_for_blocks(n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace phidro::par
