// Backend selection only; no intrinsics here.

#include "peacegrid/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "backend.hpp"

namespace peacegrid::kernels {

namespace {

bool cpu_supports(std::string_view name) {
#if defined(PEACEGRID_X86_KERNELS)
    if (name == "avx2") return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (name == "avx512") return __builtin_cpu_supports("avx512f");
#endif
    return name == "scalar";
}

const Backend* find_backend(std::string_view name) {
    if (name == "scalar") return &kScalarBackend;
#if defined(PEACEGRID_X86_KERNELS)
    if (name == "avx2" && cpu_supports("avx2")) return &kAvx2Backend;
    if (name == "avx512" && cpu_supports("avx512")) return &kAvx512Backend;
#endif
    return nullptr;
}

const Backend* pick_default() {
    if (const char* env = std::getenv("PEACEGRID_KERNELS")) {
        if (const Backend* b = find_backend(env)) return b;
    }
#if defined(PEACEGRID_X86_KERNELS)
    if (cpu_supports("avx512")) return &kAvx512Backend;
    if (cpu_supports("avx2")) return &kAvx2Backend;
#endif
    return &kScalarBackend;
}

std::atomic<const Backend*>& slot() {
    static std::atomic<const Backend*> current{pick_default()};
    return current;
}

const Backend& active() { return *slot().load(std::memory_order_relaxed); }

}  // namespace

double dot(const float* a, const float* b, std::size_t n) { return active().dot(a, b, n); }

double squared_norm(const float* v, std::size_t n) { return active().dot(v, v, n); }

void score_rows(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
                double* scores) {
    active().score_rows(rows, n_rows, dim, query, scores);
}

void score_rows_multi(const float* rows, std::size_t n_rows, std::size_t dim,
                      const float* queries, std::size_t n_queries, double* scores) {
    active().score_rows_multi(rows, n_rows, dim, queries, n_queries, scores);
}

std::string_view active_backend() { return active().name; }

bool set_backend(std::string_view name) {
    if (const Backend* b = find_backend(name)) {
        slot().store(b, std::memory_order_relaxed);
        return true;
    }
    return false;
}

std::vector<std::string_view> supported_backends() {
    std::vector<std::string_view> out{"scalar"};
#if defined(PEACEGRID_X86_KERNELS)
    if (cpu_supports("avx2")) out.push_back("avx2");
    if (cpu_supports("avx512")) out.push_back("avx512");
#endif
    return out;
}

}  // namespace peacegrid::kernels
