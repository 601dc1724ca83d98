// AVX-512F backend. One zmm accumulator holds all eight stripes, so the
// vector loop is a single fused multiply-add per 8 elements.

#if defined(PEACEGRID_X86_KERNELS)

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "backend.hpp"

namespace peacegrid::kernels {

namespace {

inline double reduce_stripes(const double s[8]) {
    return ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
}

inline void tail_stripes(double s[8], const float* a, const float* b, std::size_t i,
                         std::size_t n) {
    for (int l = 0; i + static_cast<std::size_t>(l) < n; ++l)
        s[l] = std::fma(static_cast<double>(a[i + l]), static_cast<double>(b[i + l]), s[l]);
}

double dot_avx512(const float* a, const float* b, std::size_t n) {
    __m512d acc = _mm512_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d va = _mm512_cvtps_pd(_mm256_loadu_ps(a + i));
        const __m512d vb = _mm512_cvtps_pd(_mm256_loadu_ps(b + i));
        acc = _mm512_fmadd_pd(va, vb, acc);
    }
    alignas(64) double s[8];
    _mm512_store_pd(s, acc);
    tail_stripes(s, a, b, i, n);
    return reduce_stripes(s);
}

void score_rows_avx512(const float* rows, std::size_t n_rows, std::size_t dim,
                       const float* query, double* scores) {
    for (std::size_t r = 0; r < n_rows; ++r)
        scores[r] = dot_avx512(rows + r * dim, query, dim);
}

// Four queries per pass over a row: the row conversion amortizes and four
// independent fma chains keep the ports busy.
void score_rows_multi_avx512(const float* rows, std::size_t n_rows, std::size_t dim,
                             const float* queries, std::size_t n_queries, double* scores) {
    std::vector<double> qd(n_queries * dim);
    for (std::size_t t = 0; t < n_queries * dim; ++t)
        qd[t] = static_cast<double>(queries[t]);

    const std::size_t vec_end = dim - dim % 8;
    for (std::size_t r = 0; r < n_rows; ++r) {
        const float* row = rows + r * dim;
        std::size_t j = 0;
        for (; j + 4 <= n_queries; j += 4) {
            const double* q0 = qd.data() + j * dim;
            const double* q1 = qd.data() + (j + 1) * dim;
            const double* q2 = qd.data() + (j + 2) * dim;
            const double* q3 = qd.data() + (j + 3) * dim;
            __m512d a0 = _mm512_setzero_pd();
            __m512d a1 = _mm512_setzero_pd();
            __m512d a2 = _mm512_setzero_pd();
            __m512d a3 = _mm512_setzero_pd();
            for (std::size_t i = 0; i < vec_end; i += 8) {
                const __m512d vr = _mm512_cvtps_pd(_mm256_loadu_ps(row + i));
                a0 = _mm512_fmadd_pd(vr, _mm512_loadu_pd(q0 + i), a0);
                a1 = _mm512_fmadd_pd(vr, _mm512_loadu_pd(q1 + i), a1);
                a2 = _mm512_fmadd_pd(vr, _mm512_loadu_pd(q2 + i), a2);
                a3 = _mm512_fmadd_pd(vr, _mm512_loadu_pd(q3 + i), a3);
            }
            alignas(64) double s[4][8];
            _mm512_store_pd(s[0], a0);
            _mm512_store_pd(s[1], a1);
            _mm512_store_pd(s[2], a2);
            _mm512_store_pd(s[3], a3);
            for (int t = 0; t < 4; ++t) {
                tail_stripes(s[t], row, queries + (j + t) * dim, vec_end, dim);
                scores[(j + t) * n_rows + r] = reduce_stripes(s[t]);
            }
        }
        for (; j < n_queries; ++j)
            scores[j * n_rows + r] = dot_avx512(row, queries + j * dim, dim);
    }
}

}  // namespace

const Backend kAvx512Backend = {"avx512", dot_avx512, score_rows_avx512,
                                score_rows_multi_avx512};

}  // namespace peacegrid::kernels

#endif  // PEACEGRID_X86_KERNELS
