#pragma once

#include <string>

#include "kmac/common.hpp"
#include "kmac/geograph.hpp"
#include "kmac/kernels.hpp"

namespace kmac {

enum class EstimatorKind { Standard, Linear, Rank };

std::string kind_name(EstimatorKind k);
EstimatorKind parse_estimator_kind(const std::string& s);

// Estimator value together with the pieces it is assembled from.
//
//   graph_term   n^-1 sum_i d_i^-1 sum_{j in adj(i)} K(Y_i, Y_j)
//   cross_term   the subtracted K-average (U-statistic or cyclic)
//   self_term    n^-1 sum_i K(Y_i, Y_i)
//   numerator    graph_term - cross_term
//   denominator  self_term - cross_term
//
// The raw value is reported unclamped; at finite n it may fall slightly
// outside [0,1].
struct AssociationEstimate {
    double value = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double graph_term = 0.0;
    double cross_term = 0.0;
    double self_term = 0.0;
    std::size_t n = 0;
    EstimatorKind kind = EstimatorKind::Standard;
};

// Moment estimates feeding the pivotal variance, and the assembled
// variance itself.  If s2 collapses below ~1e-12 the asymptotic test must
// refuse and suggest permutation calibration.
struct CltScaling {
    double a_hat = 0.0;
    double b_hat = 0.0;
    double c_hat = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double g3 = 0.0;
    double s2 = 0.0;
};

// The graph-vs-all association estimator.  `graph` must be built on `x`
// (same rows); `y` must not have all-identical rows.
AssociationEstimate eta_hat(const DataMatrix& x, const DataMatrix& y,
                            const KernelSpec& kernel, const GeoGraph& graph);

// Distance-only specialization with exponent 1, computed from pairwise
// Euclidean distances and norms.  Algebraically identical to eta_hat with
// the distance(alpha=1) kernel; the degree-weighted norm term below makes
// the match exact on irregular graphs (on degree-regular graphs it
// vanishes and the familiar ratio of mean distances remains).
AssociationEstimate t_n_energy(const DataMatrix& x, const DataMatrix& y,
                               const GeoGraph& graph);

// Near-linear-time variant: the pairwise average is replaced by the
// cyclic average n^-1 sum_i K(Y_i, Y_{i+1}), indices mod n.  Depends on
// row order and is not permutation invariant.
AssociationEstimate eta_hat_lin(const DataMatrix& x, const DataMatrix& y,
                                const KernelSpec& kernel, const GeoGraph& graph);

// sqrt(n) * (graph_term - cross_term) with the cross term chosen per kind.
double numerator_stat(EstimatorKind kind, const DataMatrix& x, const DataMatrix& y,
                      const KernelSpec& kernel, const GeoGraph& graph);

// Pairwise moments over distinct index tuples:
//   a = mean K^2(Y_i,Y_j), b = mean K(Y_i,Y_j)K(Y_i,Y_l),
//   c = mean K(Y_i,Y_j)K(Y_l,Y_m)
// computed via Gram row sums in O(n^2), plus the assembled variance
//   s2 = a*(g1+g3-2/(n-1)) + b*(g2-2g1-2g3-1+4/(n-1))
//      + c*(g1+g3-g2+(n-3)/(n-1)).
CltScaling clt_scaling_standard(const DataMatrix& y, const KernelSpec& kernel,
                                const GeoGraph& graph);

// Cyclic analogues (O(n) beyond graph statistics):
//   s2 = a*(g1+g3+1) + b*(g2-2g1-2g3-3) + c*(2+g1+g3-g2).
CltScaling clt_scaling_linear(const DataMatrix& y, const KernelSpec& kernel,
                              const GeoGraph& graph);

namespace detail {

// Shared scalar pieces, exposed for the inference layer.
double self_term(const KernelSpec& kernel, const DataMatrix& y);
double cross_term_ustat(const KernelRowEval& ke);
double cyclic_term(const KernelSpec& kernel, const DataMatrix& y);
double graph_term(const KernelSpec& kernel, const DataMatrix& y, const GeoGraph& graph);
void check_denominator(double denom, double self);

}  // namespace detail

}  // namespace kmac
