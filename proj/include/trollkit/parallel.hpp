#pragma once

// OpenMP helpers that collapse to serial code when built without OpenMP.

#ifdef _OPENMP
#include <omp.h>
#define TROLLKIT_PRAGMA(x) _Pragma(#x)
#define TROLLKIT_OMP_PARALLEL_FOR TROLLKIT_PRAGMA(omp parallel for schedule(static))
#define TROLLKIT_OMP_PARALLEL_FOR_DYNAMIC TROLLKIT_PRAGMA(omp parallel for schedule(dynamic, 1))
#else
#define TROLLKIT_OMP_PARALLEL_FOR
#define TROLLKIT_OMP_PARALLEL_FOR_DYNAMIC
#endif

namespace trollkit {

inline int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n)
{
#ifdef _OPENMP
    if (n > 0)
        omp_set_num_threads(n);
#else
    (void)n;
#endif
}

} // namespace trollkit
