#pragma once

#include <cstddef>

namespace peacegrid::kernels {

struct Backend {
    const char* name;
    double (*dot)(const float*, const float*, std::size_t);
    void (*score_rows)(const float*, std::size_t, std::size_t, const float*, double*);
    void (*score_rows_multi)(const float*, std::size_t, std::size_t, const float*,
                             std::size_t, double*);
};

extern const Backend kScalarBackend;

#if defined(PEACEGRID_X86_KERNELS)
extern const Backend kAvx2Backend;
extern const Backend kAvx512Backend;
#endif

}  // namespace peacegrid::kernels
