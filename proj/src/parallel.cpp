#include "phidro/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace phidro::par {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = hardware concurrency
}

int max_threads() {
  int n = g_max_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_max_threads(int n) { g_max_threads.store(n > 0 ? n : 0); }

void parallel_for_blocks(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  int nt = std::min<std::int64_t>(max_threads(), n);
  if (nt <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(nt);
  std::int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::int64_t b = t * chunk;
    std::int64_t e = std::min<std::int64_t>(b + chunk, n);
    if (b >= e) break;
    workers.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace phidro::par
