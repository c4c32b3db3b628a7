#include "tuckert/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace tuckert {

int effective_workers(std::size_t n, int threads) {
  if (n == 0) return 1;
  return static_cast<int>(std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, n));
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t, int)>& body) {
  const int workers = effective_workers(n, threads);
  if (workers == 1) {
    body(0, n, 0);
    return;
  }
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  auto range_of = [&](int w) {
    const std::size_t begin = w * base + std::min<std::size_t>(w, extra);
    return std::pair{begin, begin + base + (static_cast<std::size_t>(w) < extra ? 1 : 0)};
  };

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        auto [b, e] = range_of(w);
        body(b, e, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  try {
    auto [b, e] = range_of(0);
    body(b, e, 0);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace tuckert
