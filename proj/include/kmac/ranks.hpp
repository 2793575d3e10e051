#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kmac/common.hpp"
#include "kmac/estimators.hpp"
#include "kmac/geograph.hpp"
#include "kmac/kernels.hpp"

namespace kmac {

enum class GridSource { Halton, IidUniform, Lattice1d };

// n target points in [0,1]^d whose empirical law approximates the uniform.
struct TargetGrid {
    GridSource source = GridSource::Halton;
    std::uint64_t seed = 0;  // IidUniform only
    DataMatrix points;       // n x d

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

// First n Halton points, bases = first d primes, index starting at 1.
TargetGrid halton(std::size_t n, std::size_t d);

TargetGrid iid_uniform_grid(std::size_t n, std::size_t d, std::uint64_t seed);

// {i/n : i = 1..n}; d = 1 only.  Makes the d=1 ranks the classical ones.
TargetGrid lattice1d(std::size_t n);

// Spec grammar: "halton", "uniform:seed=7", "lattice1d".
struct GridSpec {
    GridSource source = GridSource::Halton;
    std::uint64_t seed = 0;
    std::string to_string() const;
};
GridSpec parse_grid_spec(const std::string& s);
TargetGrid make_grid(const GridSpec& spec, std::size_t n, std::size_t d);

// Minimizer of sum_i ||X_i - h_{perm(i)}||^2 over permutations.
struct RankAssignment {
    std::vector<std::uint32_t> perm;  // row i -> grid index perm[i]
    double cost = 0.0;
};

// Exact solver: monotone matching for d = 1 (optimal for squared cost on
// the line), shortest-augmenting-path assignment on the dense cost matrix
// otherwise (O(n^3) worst case, guarded to n <= 8000 unless allow_large).
RankAssignment solve_assignment(const DataMatrix& x, const TargetGrid& grid,
                                bool allow_large = false);

// Rows mapped through the assignment: row i of the result is the grid
// point matched to X_i.  The row multiset equals the grid multiset.
DataMatrix apply_ranks(const TargetGrid& grid, const RankAssignment& a);

// Rank-based estimator: both samples are replaced by their empirical
// transport ranks, the graph is built on the X-ranks, and the standard
// estimator formula is evaluated on the Y-ranks.
AssociationEstimate eta_hat_rank(const DataMatrix& x, const DataMatrix& y,
                                 const KernelSpec& kernel, const GraphSpec& graph_spec,
                                 const TargetGrid& grid_x, const TargetGrid& grid_y,
                                 GeoGraph* out_graph = nullptr,
                                 DataMatrix* out_rank_y = nullptr);

// Variance scaling for the rank statistic.  The moments are taken under
// the uniform law on [0,1]^d2 (closed form for mincdf: 1/6, 2/15, 1/9;
// quasi-Monte Carlo with mc_nodes Halton triples otherwise); the graph
// statistics come from the rank graph.
CltScaling rank_clt_scaling(const KernelSpec& kernel, std::size_t d2,
                            const GeoGraph& rank_graph, std::size_t mc_nodes = 100000,
                            bool allow_small_mc = false);

// Rank correlation along the x-order: 1 - 3 sum|r_{i+1}-r_i| / (n^2-1)
// where r_i is the rank of the y paired with the i-th smallest x.
double chatterjee_xi(const DataMatrix& x1d, const DataMatrix& y1d);

}  // namespace kmac
