#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gstorage {

/// Runs body(state, i) for i in [0, reps) on `workers` threads, each thread
/// owning one state from make_state(). Every replication draws from its own
/// stream, so callers that store results by index (or merge integer counts)
/// get output that does not depend on the worker count.
template <class MakeState, class Body>
void for_each_replication(std::size_t reps, std::size_t workers, MakeState make_state, Body body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(reps, 1));
  if (workers == 1) {
    auto state = make_state();
    for (std::size_t i = 0; i < reps; ++i) body(state, i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = reps * w / workers;
    const std::size_t hi = reps * (w + 1) / workers;
    pool.emplace_back([&, lo, hi, w] {
      try {
        auto state = make_state();
        for (std::size_t i = lo; i < hi; ++i) body(state, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Neumaier-compensated sum in index order.
inline double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

inline std::size_t default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace gstorage
