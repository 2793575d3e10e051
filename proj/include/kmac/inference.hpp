#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kmac/common.hpp"
#include "kmac/estimators.hpp"
#include "kmac/geograph.hpp"
#include "kmac/kernels.hpp"
#include "kmac/ranks.hpp"

namespace kmac {

struct TestReport {
    double statistic = 0.0;        // N_n, N_n^lin, N_n^rank, or baseline stat
    double z = 0.0;                // statistic / scaling (asymptotic only)
    double p_value = 1.0;
    std::string method;            // "asymptotic-standard", "permutation(B=...)", ...
    double estimator_value = 0.0;
    std::optional<std::uint64_t> seed;
    double runtime_ms = 0.0;
    std::size_t B = 0;             // permutation replicates, 0 for asymptotic
};

// Optional target grids for the rank estimator; defaults are the lattice
// for d = 1 and the Halton set for d >= 2.
struct RankGrids {
    std::optional<GridSpec> grid_x;
    std::optional<GridSpec> grid_y;
    std::size_t mc_nodes = 100000;
};

// One-sided upper-tail test: z = N / S, p = 1 - Phi(z).  Refuses when the
// variance estimate collapses (use permutation calibration instead).
TestReport asymptotic_test(EstimatorKind kind, const DataMatrix& x, const DataMatrix& y,
                           const KernelSpec& kernel, const GraphSpec& graph_spec,
                           const RankGrids& grids = {});

// Recomputes the estimator numerator on B uniformly random permutations of
// the rows of y (the x-graph is fixed and reused); p = (1 + #{>= obs})/(B+1).
// Replicate streams derive from (seed, replicate), and permutations act in
// a canonical row order, so reports are reproducible and, for the Standard
// kind, invariant under common row reordering of (x, y).
TestReport permutation_test(EstimatorKind kind, const DataMatrix& x, const DataMatrix& y,
                            const KernelSpec& kernel, const GraphSpec& graph_spec,
                            std::size_t B, std::uint64_t seed, const RankGrids& grids = {});

// Distance-covariance baseline (V-statistic, pairwise-distance double
// centering), permutation calibrated.  estimator_value is the squared
// distance correlation.
TestReport dcov_test(const DataMatrix& x, const DataMatrix& y, std::size_t B,
                     std::uint64_t seed);

// HSIC baseline (double-centered Gram trace product / n^2), permutation
// calibrated; the same kernel spec is applied to both samples.
TestReport hsic_test(const DataMatrix& x, const DataMatrix& y, const KernelSpec& kernel,
                     std::size_t B, std::uint64_t seed);

// Squared distance correlation of the sample (V-statistic version).
double dcor_squared(const DataMatrix& x, const DataMatrix& y);

}  // namespace kmac
