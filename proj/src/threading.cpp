#include "mvact/threading.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mvact::threading {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) {
  if (n < 1) n = 1;
  g_threads.store(n);
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
}

int threads() { return g_threads.load(); }

bool parallel() {
#ifdef _OPENMP
  return threads() > 1;
#else
  return false;
#endif
}

}  // namespace mvact::threading
