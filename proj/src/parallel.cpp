#include "gllab/parallel.hpp"

#include <omp.h>

#include <atomic>

namespace gllab::par {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads = n > 0 ? n : 0; }

int threads() {
  const int n = g_threads.load();
  return n > 0 ? n : omp_get_max_threads();
}

double detail::pairwise(double* v, std::size_t n) {
  // In-place tree: stride doubling, fixed shape for a given n.
  for (std::size_t stride = 1; stride < n; stride *= 2) {
    for (std::size_t i = 0; i + stride < n; i += 2 * stride) v[i] += v[i + stride];
  }
  return n ? v[0] : 0.0;
}

}  // namespace gllab::par
