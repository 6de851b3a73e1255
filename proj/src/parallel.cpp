#include "sirf/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sirf {

namespace {
std::atomic<int> g_threads{0};
std::atomic<bool> g_reference{false};

int env_threads() {
  const char* s = std::getenv("SIRF_THREADS");
  if (!s) return 1;
  int n = std::atoi(s);
  return n > 0 ? n : 1;
}
}  // namespace

int thread_count() {
  if (g_reference.load()) return 1;
  int n = g_threads.load();
  return n > 0 ? n : env_threads();
}

void set_thread_count(int n) { g_threads.store(n); }
void set_reference_mode(bool on) { g_reference.store(on); }
bool reference_mode() { return g_reference.load(); }

void parallel_for(int n, const std::function<void(int, int)>& fn) {
  int workers = thread_count();
  if (workers > n) workers = n;
  if (workers <= 1 || n < 64) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int b = w * chunk;
    int e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sirf
