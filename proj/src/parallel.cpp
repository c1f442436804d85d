#include "ecp/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ecp {

namespace {
unsigned g_override = 0;
thread_local bool g_inside = false;

unsigned env_budget() {
  const char* s = std::getenv("COPULA_PROC_THREADS");
  if (s != nullptr) {
    const long v = std::atol(s);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}
}  // namespace

unsigned thread_budget() { return g_override != 0 ? g_override : env_budget(); }

void set_thread_budget(unsigned n) { g_override = n; }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned budget = thread_budget();
  // nested calls run sequentially; the outer loop owns the workers
  if (budget <= 1 || count <= 1 || g_inside) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(
      count < static_cast<std::size_t>(budget) ? count : budget);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto work = [&] {
    g_inside = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ecp
