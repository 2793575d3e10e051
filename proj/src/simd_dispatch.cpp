#include "kmac/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include "kmac/common.hpp"
#include "kmac/parallel.hpp"

namespace kmac {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_threads(unsigned t) { g_threads.store(t == 0 ? 1 : t); }

unsigned threads() {
    unsigned t = g_threads.load();
    if (t == 0) {
        t = std::thread::hardware_concurrency();
        if (t == 0) t = 1;
        g_threads.store(t);
    }
    return t;
}

}  // namespace kmac

namespace kmac::simd {

namespace {

bool avx2_supported() {
#if defined(KMAC_HAVE_AVX2_TU) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") > 0;
#else
    return false;
#endif
}

std::atomic<Backend> g_backend{Backend::Scalar};
std::atomic<bool> g_initialized{false};

void ensure_init() {
    if (!g_initialized.load()) {
        g_backend.store(detect_backend());
        g_initialized.store(true);
    }
}

}  // namespace

Backend detect_backend() {
    if (const char* env = std::getenv("KMAC_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2" && avx2_supported()) return Backend::Avx2;
    }
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

Backend backend() {
    ensure_init();
    return g_backend.load();
}

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported())
        throw ConfigError("simd: AVX2 backend not supported on this CPU");
    g_backend.store(b);
    g_initialized.store(true);
}

std::string backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

#ifdef KMAC_HAVE_AVX2_TU
#define KMAC_DISPATCH(fn, ...) \
    return backend() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#define KMAC_DISPATCH_VOID(fn, ...)                  \
    if (backend() == Backend::Avx2)                  \
        avx2::fn(__VA_ARGS__);                       \
    else                                             \
        scalar::fn(__VA_ARGS__)
#else
#define KMAC_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#define KMAC_DISPATCH_VOID(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double det_sum(const double* x, std::size_t n) { KMAC_DISPATCH(det_sum, x, n); }

double det_dot(const double* a, const double* b, std::size_t n) {
    KMAC_DISPATCH(det_dot, a, b, n);
}

void sqdist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out) {
    KMAC_DISPATCH_VOID(sqdist_row, cols, d, n, q, out);
}

void l1dist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out) {
    KMAC_DISPATCH_VOID(l1dist_row, cols, d, n, q, out);
}

void dot_row(const double* const* cols, std::size_t d, std::size_t n,
             const double* q, double* out) {
    KMAC_DISPATCH_VOID(dot_row, cols, d, n, q, out);
}

void sqrt_inplace(double* x, std::size_t n) { KMAC_DISPATCH_VOID(sqrt_inplace, x, n); }

double perm_qform(const double* A, const double* B,
                  const std::uint32_t* perm, std::size_t n) {
    KMAC_DISPATCH(perm_qform, A, B, perm, n);
}

}  // namespace kmac::simd
