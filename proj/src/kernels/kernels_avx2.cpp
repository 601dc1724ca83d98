// AVX2+FMA backend. Stripes 0..3 live in one ymm accumulator, 4..7 in a
// second; vfmadd keeps the per-stripe sequence identical to the scalar
// reference, and tails fall back to scalar fma on the extracted stripes.

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

double dot_avx2(const float* a, const float* b, std::size_t n) {
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d a_lo = _mm256_cvtps_pd(_mm_loadu_ps(a + i));
        const __m256d a_hi = _mm256_cvtps_pd(_mm_loadu_ps(a + i + 4));
        const __m256d b_lo = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
        const __m256d b_hi = _mm256_cvtps_pd(_mm_loadu_ps(b + i + 4));
        acc_lo = _mm256_fmadd_pd(a_lo, b_lo, acc_lo);
        acc_hi = _mm256_fmadd_pd(a_hi, b_hi, acc_hi);
    }
    alignas(32) double s[8];
    _mm256_store_pd(s, acc_lo);
    _mm256_store_pd(s + 4, acc_hi);
    tail_stripes(s, a, b, i, n);
    return reduce_stripes(s);
}

void score_rows_avx2(const float* rows, std::size_t n_rows, std::size_t dim,
                     const float* query, double* scores) {
    for (std::size_t r = 0; r < n_rows; ++r)
        scores[r] = dot_avx2(rows + r * dim, query, dim);
}

// Two queries share each pass over a row; the row's f32->f64 conversion is
// reused, queries are preconverted once (exact, so per-pair bits are
// unchanged).
void score_rows_multi_avx2(const float* rows, std::size_t n_rows, std::size_t dim,
                           const float* queries, std::size_t n_queries, double* scores) {
    std::vector<double> qd(n_queries * dim);
    for (std::size_t t = 0; t < n_queries * dim; ++t)
        qd[t] = static_cast<double>(queries[t]);

    const std::size_t vec_end = dim - dim % 8;
    for (std::size_t r = 0; r < n_rows; ++r) {
        const float* row = rows + r * dim;
        std::size_t j = 0;
        for (; j + 2 <= n_queries; j += 2) {
            const double* q0 = qd.data() + j * dim;
            const double* q1 = qd.data() + (j + 1) * dim;
            __m256d a0_lo = _mm256_setzero_pd(), a0_hi = _mm256_setzero_pd();
            __m256d a1_lo = _mm256_setzero_pd(), a1_hi = _mm256_setzero_pd();
            for (std::size_t i = 0; i < vec_end; i += 8) {
                const __m256d r_lo = _mm256_cvtps_pd(_mm_loadu_ps(row + i));
                const __m256d r_hi = _mm256_cvtps_pd(_mm_loadu_ps(row + i + 4));
                a0_lo = _mm256_fmadd_pd(r_lo, _mm256_loadu_pd(q0 + i), a0_lo);
                a0_hi = _mm256_fmadd_pd(r_hi, _mm256_loadu_pd(q0 + i + 4), a0_hi);
                a1_lo = _mm256_fmadd_pd(r_lo, _mm256_loadu_pd(q1 + i), a1_lo);
                a1_hi = _mm256_fmadd_pd(r_hi, _mm256_loadu_pd(q1 + i + 4), a1_hi);
            }
            alignas(32) double s0[8], s1[8];
            _mm256_store_pd(s0, a0_lo);
            _mm256_store_pd(s0 + 4, a0_hi);
            _mm256_store_pd(s1, a1_lo);
            _mm256_store_pd(s1 + 4, a1_hi);
            tail_stripes(s0, row, queries + j * dim, vec_end, dim);
            tail_stripes(s1, row, queries + (j + 1) * dim, vec_end, dim);
            scores[j * n_rows + r] = reduce_stripes(s0);
            scores[(j + 1) * n_rows + r] = reduce_stripes(s1);
        }
        for (; j < n_queries; ++j)
            scores[j * n_rows + r] = dot_avx2(row, queries + j * dim, dim);
    }
}

}  // namespace

const Backend kAvx2Backend = {"avx2", dot_avx2, score_rows_avx2, score_rows_multi_avx2};

}  // namespace peacegrid::kernels

#endif  // PEACEGRID_X86_KERNELS
