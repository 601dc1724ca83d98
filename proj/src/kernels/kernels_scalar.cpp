// Reference backend. Everything here is the plainest possible statement of
// the striped accumulation order; the SIMD backends must match it bit for bit.

#include <cmath>
#include <cstddef>

#include "backend.hpp"

namespace peacegrid::kernels {

namespace {

double dot_scalar(const float* a, const float* b, std::size_t n) {
    double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int l = 0; l < 8; ++l)
            s[l] = std::fma(static_cast<double>(a[i + l]), static_cast<double>(b[i + l]), s[l]);
    }
    for (int l = 0; i + static_cast<std::size_t>(l) < n; ++l)
        s[l] = std::fma(static_cast<double>(a[i + l]), static_cast<double>(b[i + l]), s[l]);
    return ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
}

void score_rows_scalar(const float* rows, std::size_t n_rows, std::size_t dim,
                       const float* query, double* scores) {
    for (std::size_t r = 0; r < n_rows; ++r)
        scores[r] = dot_scalar(rows + r * dim, query, dim);
}

void score_rows_multi_scalar(const float* rows, std::size_t n_rows, std::size_t dim,
                             const float* queries, std::size_t n_queries, double* scores) {
    for (std::size_t j = 0; j < n_queries; ++j)
        for (std::size_t r = 0; r < n_rows; ++r)
            scores[j * n_rows + r] = dot_scalar(rows + r * dim, queries + j * dim, dim);
}

}  // namespace

const Backend kScalarBackend = {"scalar", dot_scalar, score_rows_scalar, score_rows_multi_scalar};

}  // namespace peacegrid::kernels
