#include "hessflow/parallel.hpp"

#include <algorithm>
#include <cstdlib>

#ifdef HESSFLOW_HAVE_OPENMP
#include <omp.h>
#endif

namespace hessflow {

int worker_count() {
#ifdef HESSFLOW_HAVE_OPENMP
  static const int count = [] {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("HESSFLOW_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, n);
  }();
  return count;
#else
  return 1;
#endif
}

}  // namespace hessflow
