#pragma once

#include <omp.h>

namespace hsiclass {

// Worker-count convention shared by all parallel kernels: 0 means "all
// available", anything positive is taken literally (oversubscription is
// allowed; results never depend on the count).
inline int resolve_workers(int workers) {
  return workers > 0 ? workers : omp_get_max_threads();
}

}  // namespace hsiclass
