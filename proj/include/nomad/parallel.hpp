#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace nomad {

// Thread budget: explicit request, else NOMAD_MFE_THREADS, else hardware.
inline int thread_budget(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("NOMAD_MFE_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}

// Runs fn(i) for i in [0, count) and keeps results in index order, so the
// outcome does not depend on the thread count or scheduling.
template <typename Result>
std::vector<Result> parallel_map(int count, int threads,
                                 const std::function<Result(int)>& fn) {
  std::vector<Result> results(count);
  const int workers = std::min(thread_budget(threads), count > 0 ? count : 1);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < count; i += workers) results[i] = fn(i);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace nomad
