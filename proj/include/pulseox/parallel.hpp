#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pulseox {

// Parallel map over [0, n).  Bodies must touch only their own index; under
// that contract results are bit-identical to a plain serial loop regardless
// of thread count, which the test suite checks against the reference
// implementations.
template <class F>
void parallel_for(std::ptrdiff_t n, F&& body) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
#endif
}

inline int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace pulseox
