#include "molgp/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace molgp {

namespace {

int env_thread_cap() {
  const char* v = std::getenv("MOLGP_THREADS");
  if (v == nullptr || *v == '\0') return -1;
  char* end = nullptr;
  long parsed = std::strtol(v, &end, 10);
  if (end == v || parsed < 0) return -1;
  return static_cast<int>(parsed);
}

thread_local bool inside_parallel_region = false;

}  // namespace

int max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int cap = env_thread_cap();
  if (cap < 0) return hw;   // unset: all cores
  if (cap == 0) return hw;  // 0: all cores
  return cap < hw ? cap : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;

  const int workers = inside_parallel_region ? 1 : max_threads();
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr err;

  auto body = [&]() {
    inside_parallel_region = true;
    for (;;) {
      std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
    inside_parallel_region = false;
  };

  std::vector<std::thread> pool;
  const std::size_t spawn = static_cast<std::size_t>(workers) - 1;
  pool.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();

  if (err) std::rethrow_exception(err);
}

void warn(const std::string& msg) {
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  std::cerr << "[molgp] warning: " << msg << "\n";
}

}  // namespace molgp
