#pragma once

#include <charconv>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace lightray {

// Shortest decimal form that parses back to the same double; keeps config
// and report files stable across runs.
inline std::string compact_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Pairwise summation with Kahan compensation at the leaves.  The reduction
// tree depends only on the length, so results are identical no matter how
// the values were produced (serial or parallel fill).
inline double pairwise_sum(std::span<const double> xs) {
  const size_t n = xs.size();
  if (n <= 32) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
      double y = x - c;
      double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

// Mean and (unbiased) sample variance via two pairwise passes.
struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;
};

inline MeanVar mean_variance(std::span<const double> xs) {
  MeanVar mv;
  const size_t n = xs.size();
  if (n == 0) return mv;
  mv.mean = pairwise_sum(xs) / static_cast<double>(n);
  if (n < 2) return mv;
  std::vector<double> sq(n);
  for (size_t i = 0; i < n; ++i) {
    double d = xs[i] - mv.mean;
    sq[i] = d * d;
  }
  mv.variance = pairwise_sum(sq) / static_cast<double>(n - 1);
  return mv;
}

// Static-chunked parallel loop.  Each index is processed exactly once and
// runs must write only to their own output slot, which keeps results
// independent of the worker count.
template <class Fn>
void parallel_for(std::int64_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int w = std::min<std::int64_t>(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(w));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      const std::int64_t lo = count * t / w;
      const std::int64_t hi = count * (t + 1) / w;
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Worker count from the environment (LIGHTRAY_WORKERS), defaulting to the
// hardware concurrency.  Results never depend on this, only wall time.
int worker_count();

}  // namespace lightray
