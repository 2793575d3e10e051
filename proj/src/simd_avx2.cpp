#include "kmac/simd.hpp"

#ifdef KMAC_HAVE_AVX2_TU

#include <immintrin.h>

#include <cmath>
#include <vector>

// AVX2 variants.  Same lane structure as the scalar reference: lane l of
// the vector accumulator sees exactly the elements l, l+4, l+8, ... so the
// results are bit-identical (FMA contraction is disabled project-wide).

namespace kmac::simd::avx2 {

namespace {
constexpr std::size_t kBlock = 256;

std::size_t split_point(std::size_t n) { return ((n / 2 + 3) / 4) * 4; }

inline double combine_lanes(__m256d acc, const double* tail, std::size_t rem) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t r = 0; r < rem; ++r) lane[r] += tail[r];
    return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double sum_block(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + j));
    return combine_lanes(acc, x + j, n - j);
}

double dot_block(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t r = 0; j < n; ++j, ++r) lane[r] += a[j] * b[j];
    return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}
}  // namespace

double det_sum(const double* x, std::size_t n) {
    if (n <= kBlock) return sum_block(x, n);
    const std::size_t m = split_point(n);
    return det_sum(x, m) + det_sum(x + m, n - m);
}

double det_dot(const double* a, const double* b, std::size_t n) {
    if (n <= kBlock) return dot_block(a, b, n);
    const std::size_t m = split_point(n);
    return det_dot(a, b, m) + det_dot(a + m, b + m, n - m);
}

void sqdist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out) {
    {
        const __m256d c = _mm256_set1_pd(q[0]);
        const double* col = cols[0];
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d t = _mm256_sub_pd(c, _mm256_loadu_pd(col + j));
            _mm256_storeu_pd(out + j, _mm256_mul_pd(t, t));
        }
        for (; j < n; ++j) {
            const double t = q[0] - col[j];
            out[j] = t * t;
        }
    }
    for (std::size_t k = 1; k < d; ++k) {
        const __m256d c = _mm256_set1_pd(q[k]);
        const double* col = cols[k];
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d t = _mm256_sub_pd(c, _mm256_loadu_pd(col + j));
            _mm256_storeu_pd(out + j,
                             _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_mul_pd(t, t)));
        }
        for (; j < n; ++j) {
            const double t = q[k] - col[j];
            out[j] += t * t;
        }
    }
}

void l1dist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out) {
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
    {
        const __m256d c = _mm256_set1_pd(q[0]);
        const double* col = cols[0];
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d t = _mm256_sub_pd(c, _mm256_loadu_pd(col + j));
            _mm256_storeu_pd(out + j, _mm256_and_pd(t, absmask));
        }
        for (; j < n; ++j) out[j] = std::fabs(q[0] - col[j]);
    }
    for (std::size_t k = 1; k < d; ++k) {
        const __m256d c = _mm256_set1_pd(q[k]);
        const double* col = cols[k];
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d t = _mm256_sub_pd(c, _mm256_loadu_pd(col + j));
            _mm256_storeu_pd(out + j,
                             _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_and_pd(t, absmask)));
        }
        for (; j < n; ++j) out[j] += std::fabs(q[k] - col[j]);
    }
}

void dot_row(const double* const* cols, std::size_t d, std::size_t n,
             const double* q, double* out) {
    {
        const __m256d c = _mm256_set1_pd(q[0]);
        const double* col = cols[0];
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4)
            _mm256_storeu_pd(out + j, _mm256_mul_pd(c, _mm256_loadu_pd(col + j)));
        for (; j < n; ++j) out[j] = q[0] * col[j];
    }
    for (std::size_t k = 1; k < d; ++k) {
        const __m256d c = _mm256_set1_pd(q[k]);
        const double* col = cols[k];
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4)
            _mm256_storeu_pd(out + j,
                             _mm256_add_pd(_mm256_loadu_pd(out + j),
                                           _mm256_mul_pd(c, _mm256_loadu_pd(col + j))));
        for (; j < n; ++j) out[j] += q[k] * col[j];
    }
}

void sqrt_inplace(double* x, std::size_t n) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) _mm256_storeu_pd(x + j, _mm256_sqrt_pd(_mm256_loadu_pd(x + j)));
    for (; j < n; ++j) x[j] = std::sqrt(x[j]);
}

double perm_qform(const double* A, const double* B,
                  const std::uint32_t* perm, std::size_t n) {
    std::vector<double> row_vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = A + i * n;
        const double* b = B + static_cast<std::size_t>(perm[i]) * n;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m128i idx =
                _mm_loadu_si128(reinterpret_cast<const __m128i*>(perm + j));
            const __m256d g = _mm256_i32gather_pd(b, idx, 8);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + j), g));
        }
        alignas(32) double lane[4];
        _mm256_store_pd(lane, acc);
        for (std::size_t r = 0; j < n; ++j, ++r) lane[r] += a[j] * b[perm[j]];
        row_vals[i] = (lane[0] + lane[2]) + (lane[1] + lane[3]);
    }
    return det_sum(row_vals.data(), n);
}

}  // namespace kmac::simd::avx2

#endif  // KMAC_HAVE_AVX2_TU
