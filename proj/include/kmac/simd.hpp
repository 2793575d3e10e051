#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Data-parallel inner loops used by every estimator: order-pinned
// reductions, squared/absolute distance rows, and the permuted quadratic
// form behind the permutation baselines.
//
// Each kernel has a scalar reference and an AVX2 variant that follows the
// same lane structure (4 interleaved accumulators, blocks combined
// pairwise), so both backends produce bit-identical doubles.  The backend
// is picked once at startup from CPUID and can be forced for testing.

namespace kmac::simd {

enum class Backend { Scalar, Avx2 };

Backend backend();
void set_backend(Backend b);          // throws ConfigError if unsupported
Backend detect_backend();             // best supported backend
std::string backend_name(Backend b);

// Order-pinned sum of x[0..n): lane l accumulates x[l], x[l+4], ...;
// blocks larger than 256 split pairwise on multiples of 4.
double det_sum(const double* x, std::size_t n);

// Same reduction over elementwise products.
double det_dot(const double* a, const double* b, std::size_t n);

// out[j] = squared Euclidean distance between point q and row j of the
// column-major matrix cols (d columns of length n).
void sqdist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out);

// out[j] = L1 distance.
void l1dist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out);

// out[j] = <q, row j>.
void dot_row(const double* const* cols, std::size_t d, std::size_t n,
             const double* q, double* out);

// Elementwise sqrt (IEEE, identical in both backends).
void sqrt_inplace(double* x, std::size_t n);

// sum_{i,j} A[i*n+j] * B[perm[i]*n+perm[j]] with the canonical reduction
// (per-row lane sums, rows combined in index order).
double perm_qform(const double* A, const double* B,
                  const std::uint32_t* perm, std::size_t n);

namespace scalar {
double det_sum(const double* x, std::size_t n);
double det_dot(const double* a, const double* b, std::size_t n);
void sqdist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out);
void l1dist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out);
void dot_row(const double* const* cols, std::size_t d, std::size_t n,
             const double* q, double* out);
void sqrt_inplace(double* x, std::size_t n);
double perm_qform(const double* A, const double* B,
                  const std::uint32_t* perm, std::size_t n);
}  // namespace scalar

#ifdef KMAC_WITH_AVX2
#define KMAC_HAVE_AVX2_TU 1
namespace avx2 {
double det_sum(const double* x, std::size_t n);
double det_dot(const double* a, const double* b, std::size_t n);
void sqdist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out);
void l1dist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out);
void dot_row(const double* const* cols, std::size_t d, std::size_t n,
             const double* q, double* out);
void sqrt_inplace(double* x, std::size_t n);
double perm_qform(const double* A, const double* B,
                  const std::uint32_t* perm, std::size_t n);
}  // namespace avx2
#endif

}  // namespace kmac::simd
