#include "kmac/simd.hpp"

#include <cmath>
#include <vector>

// Reference backend.  The lane structure below is the contract: the AVX2
// translation unit mirrors it operation for operation.

namespace kmac::simd::scalar {

namespace {
constexpr std::size_t kBlock = 256;

std::size_t split_point(std::size_t n) {
    // midpoint rounded up to a multiple of the lane width
    return ((n / 2 + 3) / 4) * 4;
}

double sum_block(const double* x, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        acc0 += x[j];
        acc1 += x[j + 1];
        acc2 += x[j + 2];
        acc3 += x[j + 3];
    }
    double lane[4] = {acc0, acc1, acc2, acc3};
    for (std::size_t r = 0; j < n; ++j, ++r) lane[r] += x[j];
    return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double dot_block(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        acc0 += a[j] * b[j];
        acc1 += a[j + 1] * b[j + 1];
        acc2 += a[j + 2] * b[j + 2];
        acc3 += a[j + 3] * b[j + 3];
    }
    double lane[4] = {acc0, acc1, acc2, acc3};
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
        const double c = q[0];
        const double* col = cols[0];
        for (std::size_t j = 0; j < n; ++j) {
            const double t = c - col[j];
            out[j] = t * t;
        }
    }
    for (std::size_t k = 1; k < d; ++k) {
        const double c = q[k];
        const double* col = cols[k];
        for (std::size_t j = 0; j < n; ++j) {
            const double t = c - col[j];
            out[j] += t * t;
        }
    }
}

void l1dist_row(const double* const* cols, std::size_t d, std::size_t n,
                const double* q, double* out) {
    {
        const double c = q[0];
        const double* col = cols[0];
        for (std::size_t j = 0; j < n; ++j) out[j] = std::fabs(c - col[j]);
    }
    for (std::size_t k = 1; k < d; ++k) {
        const double c = q[k];
        const double* col = cols[k];
        for (std::size_t j = 0; j < n; ++j) out[j] += std::fabs(c - col[j]);
    }
}

void dot_row(const double* const* cols, std::size_t d, std::size_t n,
             const double* q, double* out) {
    {
        const double c = q[0];
        const double* col = cols[0];
        for (std::size_t j = 0; j < n; ++j) out[j] = c * col[j];
    }
    for (std::size_t k = 1; k < d; ++k) {
        const double c = q[k];
        const double* col = cols[k];
        for (std::size_t j = 0; j < n; ++j) out[j] += c * col[j];
    }
}

void sqrt_inplace(double* x, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) x[j] = std::sqrt(x[j]);
}

double perm_qform(const double* A, const double* B,
                  const std::uint32_t* perm, std::size_t n) {
    std::vector<double> row_vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = A + i * n;
        const double* b = B + static_cast<std::size_t>(perm[i]) * n;
        double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            acc0 += a[j] * b[perm[j]];
            acc1 += a[j + 1] * b[perm[j + 1]];
            acc2 += a[j + 2] * b[perm[j + 2]];
            acc3 += a[j + 3] * b[perm[j + 3]];
        }
        double lane[4] = {acc0, acc1, acc2, acc3};
        for (std::size_t r = 0; j < n; ++j, ++r) lane[r] += a[j] * b[perm[j]];
        row_vals[i] = (lane[0] + lane[2]) + (lane[1] + lane[3]);
    }
    return det_sum(row_vals.data(), n);
}

}  // namespace kmac::simd::scalar
