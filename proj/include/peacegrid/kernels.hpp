#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace peacegrid::kernels {

// Inner-loop arithmetic for 32-bit float vectors with 64-bit accumulation.
//
// The accumulation order is part of the contract, not an implementation
// detail: dot(a, b, n) keeps eight striped partial sums, where stripe l
// accumulates elements l, l+8, l+16, ... in index order via
// fma(double(a[i]), double(b[i]), stripe_l), and the stripes combine in the
// fixed tree ((s0+s1)+(s2+s3)) + ((s4+s5)+(s6+s7)). Every backend (the
// scalar reference, AVX2+FMA, AVX-512F) implements exactly this order, so
// results are bit-identical across backends, runs, and machines.

double dot(const float* a, const float* b, std::size_t n);

// dot(v, v, n) under the same striped order.
double squared_norm(const float* v, std::size_t n);

// scores[r] = dot(rows + r*dim, query, dim) for r in [0, n_rows).
void score_rows(const float* rows, std::size_t n_rows, std::size_t dim,
                const float* query, double* scores);

// scores[j*n_rows + r] = dot(rows + r*dim, queries + j*dim, dim).
// One pass over the rows for the whole query block; that pass is what keeps
// large scans memory-friendly.
void score_rows_multi(const float* rows, std::size_t n_rows, std::size_t dim,
                      const float* queries, std::size_t n_queries, double* scores);

// Backend selection. The best supported backend is picked on first use;
// set_backend() narrows it (for equivalence tests or the
// PEACEGRID_KERNELS=scalar|avx2|avx512 override honored at startup).
std::string_view active_backend();
bool set_backend(std::string_view name);
std::vector<std::string_view> supported_backends();

}  // namespace peacegrid::kernels
