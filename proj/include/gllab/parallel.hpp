#pragma once

// Data-parallel loops and thread-count-independent reductions.
//
// Every sum goes through fixed-size blocks that are reduced pairwise in a
// fixed order, so results are bit-identical for any number of threads.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gllab::par {

inline constexpr std::size_t kBlock = 2048;

void set_threads(int n);
int threads();

namespace detail {
double pairwise(double* v, std::size_t n);
}

template <class F>
void for_each(std::size_t n, F&& f) {
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(threads())
  for (std::int64_t i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
}

/// Deterministic sum of f(i) for i in [0, n).
template <class F>
double sum_of(std::size_t n, F&& f) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
  const auto nb = static_cast<std::int64_t>(nblocks);
#pragma omp parallel for schedule(static) num_threads(threads())
  for (std::int64_t b = 0; b < nb; ++b) {
    double buf[kBlock];
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    for (std::size_t i = lo; i < hi; ++i) buf[i - lo] = f(i);
    partial[static_cast<std::size_t>(b)] = detail::pairwise(buf, hi - lo);
  }
  return detail::pairwise(partial.data(), nblocks);
}

inline double sum(std::span<const double> v) {
  return sum_of(v.size(), [&](std::size_t i) { return v[i]; });
}

/// Deterministic maximum (order-independent by nature).
template <class F>
double max_of(std::size_t n, F&& f, double init) {
  double m = init;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = f(i);
    if (x > m) m = x;
  }
  return m;
}

}  // namespace gllab::par
