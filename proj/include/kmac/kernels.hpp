#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kmac/common.hpp"

namespace kmac {

enum class KernelFamily { Gaussian, Laplacian, Distance, Linear, MinCdf };

// A positive-definite kernel on R^d, evaluable pointwise.
//
//   gaussian   exp(-||a-b||_2^2 / sigma^2)          sigma > 0, default 1
//   laplace    exp(-||a-b||_1 / sigma)              sigma > 0, default 1
//   distance   (||a||^alpha+||b||^alpha-||a-b||^alpha)/2,  0 < alpha <= 2
//   linear     <a, b>
//   mincdf     min(a, b) on scalars in [0,1]
//
// The distance family with alpha = 2 and the linear family do not separate
// all distributions; they are kept for the variance-ratio oracle and are
// flagged by is_characteristic().
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double sigma = 1.0;   // Gaussian / Laplacian bandwidth
    double alpha = 1.0;   // Distance exponent
    bool median_bandwidth = false;  // resolve sigma from data before use

    void validate() const;
    bool is_characteristic() const;
    std::string to_string() const;
};

// Spec string grammar: "gaussian[:sigma=S|:sigma=median]", "laplace[:...]",
// "distance[:alpha=A]", "linear", "mincdf".
KernelSpec parse_kernel_spec(const std::string& s);

// Median pairwise distance (L2 for Gaussian, L1 for Laplacian) over an
// evenly strided subsample of at most 1024 rows; never applied by default.
double median_heuristic_bandwidth(const KernelSpec& spec, const DataMatrix& y);

// Returns a copy with median_bandwidth resolved to a concrete sigma.
KernelSpec resolve_bandwidth(const KernelSpec& spec, const DataMatrix& y);

double kernel_eval(const KernelSpec& spec, std::span<const double> y1,
                   std::span<const double> y2);

// [K(Y_i, Y_i)] for each row.
std::vector<double> kernel_self_diag(const KernelSpec& spec, const DataMatrix& y);

double kernel_self(const KernelSpec& spec, const double* y, std::size_t d);

// sup_y K(y,y) for bounded families (Gaussian, Laplacian, MinCdf).
std::optional<double> kernel_sup(const KernelSpec& spec);

// Fills out[j] = K(q, row j) for j in [0, n) using the vectorized distance
// rows; `norms` must hold the L2 norms of all rows for the distance family
// (pass nullptr otherwise) and qnorm the norm of q.
class KernelRowEval {
public:
    KernelRowEval(const KernelSpec& spec, const DataMatrix& y);

    std::size_t size() const { return n_; }
    // out[j] = K(row q_index, row j), all j.
    void fill_row(std::size_t q_index, double* out) const { fill(q_index, 0, n_, out); }
    // out[t] = K(row q_index, row j0+t) for t in [0, j1-j0).
    void fill(std::size_t q_index, std::size_t j0, std::size_t j1, double* out) const;

private:
    KernelSpec spec_;
    const DataMatrix& y_;
    ColMatrix cols_;
    std::vector<double> norms_;  // per-row data for distance/linear families
    std::size_t n_ = 0;
};

}  // namespace kmac
