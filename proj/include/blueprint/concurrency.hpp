#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace blueprint {

// Runs fn(0..n-1) on up to `workers` threads. Exceptions are captured per
// index and returned so callers can decide between dropping and failing;
// slot order always matches input order.
inline std::vector<std::exception_ptr> run_indexed(std::size_t n, int workers,
                                                   const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (n == 0) return errors;
  if (workers < 1) workers = 1;
  if (static_cast<std::size_t>(workers) > n) workers = static_cast<int>(n);

  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    return errors;
  }

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < n;
           i += static_cast<std::size_t>(workers)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return errors;
}

}  // namespace blueprint
