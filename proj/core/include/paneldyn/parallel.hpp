#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace paneldyn {

/// Static partition of [0, count) over `threads` workers. Each index is
/// processed exactly once; workers must write only to their own slots so
/// results are identical for any thread count.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Worker-count resolution: explicit flag > PANELDYN_THREADS > hardware.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PANELDYN_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace paneldyn
