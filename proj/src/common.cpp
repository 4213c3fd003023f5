// SPDX-License-Identifier: Apache-2.0
#include <latlapmed/common.hpp>

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace latlapmed {

std::string to_string(Metric m) {
  return m == Metric::Euclidean ? "euclidean" : "cosine";
}

Metric metric_from_string(const std::string& s) {
  if (s == "euclidean") return Metric::Euclidean;
  if (s == "cosine") return Metric::Cosine;
  throw ValidationError("unknown metric: " + s);
}

Index ceil_fraction(double phi, Index n) {
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw ValidationError("ceil_fraction: fraction must be positive");
  }
  double raw = phi * static_cast<double>(n);
  Index k = static_cast<Index>(std::ceil(raw - 1e-9));
  if (k < 0) k = 0;
  if (k > n) k = n;
  return k;
}

int default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_blocks(Index n, int workers,
                         const std::function<void(Index, Index)>& fn) {
  if (n <= 0) return;
  if (workers <= 0) workers = default_workers();
  Index w = std::min<Index>(workers, n);
  if (w <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(w));
  Index chunk = (n + w - 1) / w;
  for (Index t = 0; t < w; ++t) {
    Index lo = t * chunk;
    Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, t] {
      try {
        fn(lo, hi);
      } catch (...) {
        errors[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void parallel_tasks(Index count, int workers,
                    const std::function<void(Index)>& task) {
  if (count <= 0) return;
  if (workers <= 0) workers = default_workers();
  Index w = std::min<Index>(workers, count);
  if (w <= 1) {
    for (Index i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  std::vector<std::thread> pool;
  for (Index t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);  // lowest task index wins
  }
}

}  // namespace latlapmed
