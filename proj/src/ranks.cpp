#include "kmac/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kmac/rng.hpp"
#include "kmac/simd.hpp"

namespace kmac {

namespace {

constexpr std::size_t kAssignmentGuard = 8000;

const std::uint32_t kPrimes[25] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                   43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

double radical_inverse(std::uint64_t index, std::uint32_t base) {
    double inv_base = 1.0 / base;
    double f = inv_base;
    double value = 0.0;
    while (index > 0) {
        value += static_cast<double>(index % base) * f;
        index /= base;
        f *= inv_base;
    }
    return value;
}

// Shortest augmenting path assignment with potentials; exact on real
// costs.  1-based internal indexing.
std::vector<std::uint32_t> solve_dense_assignment(const std::vector<double>& cost,
                                                  std::size_t n) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            const double* row = cost.data() + (i0 - 1) * n;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::uint32_t> perm(n);
    for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = static_cast<std::uint32_t>(j - 1);
    return perm;
}

double assignment_cost(const DataMatrix& x, const TargetGrid& grid,
                       const std::vector<std::uint32_t>& perm) {
    std::vector<double> terms(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        terms[i] = sq_dist(x.row(i), grid.points.row(perm[i]), x.cols());
    return simd::det_sum(terms.data(), terms.size());
}

}  // namespace

TargetGrid halton(std::size_t n, std::size_t d) {
    if (n < 1 || d < 1) throw ConfigError("halton: n and d must be positive");
    if (d > 25) throw ConfigError("halton: d > 25 not supported (first 25 prime bases)");
    TargetGrid g;
    g.source = GridSource::Halton;
    g.points = DataMatrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k)
            g.points.at(i, k) = radical_inverse(i + 1, kPrimes[k]);
    return g;
}

TargetGrid iid_uniform_grid(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n < 1 || d < 1) throw ConfigError("uniform grid: n and d must be positive");
    TargetGrid g;
    g.source = GridSource::IidUniform;
    g.seed = seed;
    g.points = DataMatrix(n, d);
    CounterRng rng = CounterRng::derive(seed, 0x6e1d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) g.points.at(i, k) = rng.next_double();
    return g;
}

TargetGrid lattice1d(std::size_t n) {
    if (n < 1) throw ConfigError("lattice1d: n must be positive");
    TargetGrid g;
    g.source = GridSource::Lattice1d;
    g.points = DataMatrix(n, 1);
    for (std::size_t i = 0; i < n; ++i)
        g.points.at(i, 0) = static_cast<double>(i + 1) / static_cast<double>(n);
    return g;
}

std::string GridSpec::to_string() const {
    switch (source) {
        case GridSource::Halton: return "halton";
        case GridSource::IidUniform: return "uniform:seed=" + std::to_string(seed);
        case GridSource::Lattice1d: return "lattice1d";
    }
    return "?";
}

GridSpec parse_grid_spec(const std::string& s) {
    GridSpec spec;
    if (s == "halton") {
        spec.source = GridSource::Halton;
        return spec;
    }
    if (s == "lattice1d") {
        spec.source = GridSource::Lattice1d;
        return spec;
    }
    if (s.rfind("uniform", 0) == 0) {
        spec.source = GridSource::IidUniform;
        const auto pos = s.find(":seed=");
        if (pos != std::string::npos) {
            try {
                spec.seed = std::stoull(s.substr(pos + 6));
            } catch (const std::invalid_argument&) {
                throw ConfigError("bad grid seed in: " + s);
            }
        } else if (s != "uniform") {
            throw ConfigError("bad grid spec: " + s);
        }
        return spec;
    }
    throw ConfigError("unknown grid spec: " + s);
}

TargetGrid make_grid(const GridSpec& spec, std::size_t n, std::size_t d) {
    switch (spec.source) {
        case GridSource::Halton: return halton(n, d);
        case GridSource::IidUniform: return iid_uniform_grid(n, d, spec.seed);
        case GridSource::Lattice1d:
            if (d != 1) throw ConfigError("lattice1d grid requires d = 1");
            return lattice1d(n);
    }
    throw ConfigError("unreachable grid source");
}

RankAssignment solve_assignment(const DataMatrix& x, const TargetGrid& grid,
                                bool allow_large) {
    const std::size_t n = x.rows();
    if (n < 1) throw ConfigError("solve_assignment: empty sample");
    if (grid.size() != n) throw ConfigError("grid size must equal the row count");
    if (grid.dim() != x.cols()) throw ConfigError("grid dimension mismatch");
    if (!x.all_finite() || !grid.points.all_finite())
        throw ConfigError("non-finite assignment costs");
    if (n > kAssignmentGuard && !allow_large)
        throw ConfigError("assignment guarded to n <= " + std::to_string(kAssignmentGuard) +
                          " (pass the override to force)");

    RankAssignment out;
    if (x.cols() == 1) {
        // Monotone matching is optimal for the squared cost on the line.
        std::vector<std::uint32_t> xi(n), gi(n);
        std::iota(xi.begin(), xi.end(), 0);
        std::iota(gi.begin(), gi.end(), 0);
        std::sort(xi.begin(), xi.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (x.at(a, 0) != x.at(b, 0)) return x.at(a, 0) < x.at(b, 0);
            return a < b;
        });
        std::sort(gi.begin(), gi.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (grid.points.at(a, 0) != grid.points.at(b, 0))
                return grid.points.at(a, 0) < grid.points.at(b, 0);
            return a < b;
        });
        out.perm.resize(n);
        for (std::size_t t = 0; t < n; ++t) out.perm[xi[t]] = gi[t];
    } else {
        std::vector<double> cost(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                cost[i * n + j] = sq_dist(x.row(i), grid.points.row(j), x.cols());
        out.perm = solve_dense_assignment(cost, n);
    }
    out.cost = assignment_cost(x, grid, out.perm);
    return out;
}

DataMatrix apply_ranks(const TargetGrid& grid, const RankAssignment& a) {
    const std::size_t n = a.perm.size();
    DataMatrix out(n, grid.dim());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < grid.dim(); ++k)
            out.at(i, k) = grid.points.at(a.perm[i], k);
    return out;
}

AssociationEstimate eta_hat_rank(const DataMatrix& x, const DataMatrix& y,
                                 const KernelSpec& kernel, const GraphSpec& graph_spec,
                                 const TargetGrid& grid_x, const TargetGrid& grid_y,
                                 GeoGraph* out_graph, DataMatrix* out_rank_y) {
    if (x.rows() != y.rows()) throw ConfigError("x and y must have the same row count");
    const RankAssignment ax = solve_assignment(x, grid_x);
    const RankAssignment ay = solve_assignment(y, grid_y);
    const DataMatrix rank_x = apply_ranks(grid_x, ax);
    const DataMatrix rank_y = apply_ranks(grid_y, ay);
    const GeoGraph graph = build_graph(graph_spec, rank_x);
    AssociationEstimate est = eta_hat(rank_x, rank_y, kernel, graph);
    est.kind = EstimatorKind::Rank;
    if (out_graph) *out_graph = graph;
    if (out_rank_y) *out_rank_y = rank_y;
    return est;
}

CltScaling rank_clt_scaling(const KernelSpec& kernel, std::size_t d2,
                            const GeoGraph& rank_graph, std::size_t mc_nodes,
                            bool allow_small_mc) {
    kernel.validate();
    if (kernel.median_bandwidth)
        throw ConfigError("rank_clt_scaling: unresolved median bandwidth");
    CltScaling c;
    if (kernel.family == KernelFamily::MinCdf) {
        if (d2 != 1) throw ConfigError("mincdf kernel is defined only for d=1");
        // uniform-law moments of min(U,V) on [0,1]
        c.a_hat = 1.0 / 6.0;
        c.b_hat = 2.0 / 15.0;
        c.c_hat = 1.0 / 9.0;
    } else {
        if (mc_nodes < 10000 && !allow_small_mc)
            throw ConfigError("rank_clt_scaling: mc_nodes < 10000 (pass override to force)");
        const TargetGrid nodes = halton(mc_nodes, 3 * d2);
        std::vector<double> ka(mc_nodes), kb(mc_nodes), kc(mc_nodes);
        for (std::size_t i = 0; i < mc_nodes; ++i) {
            const double* row = nodes.points.row(i);
            const std::span<const double> u1(row, d2);
            const std::span<const double> u2(row + d2, d2);
            const std::span<const double> u3(row + 2 * d2, d2);
            const double k12 = kernel_eval(kernel, u1, u2);
            const double k13 = kernel_eval(kernel, u1, u3);
            ka[i] = k12 * k12;
            kb[i] = k12 * k13;
            kc[i] = k12;
        }
        const double m = static_cast<double>(mc_nodes);
        c.a_hat = simd::det_sum(ka.data(), mc_nodes) / m;
        c.b_hat = simd::det_sum(kb.data(), mc_nodes) / m;
        const double mean_k = simd::det_sum(kc.data(), mc_nodes) / m;
        c.c_hat = mean_k * mean_k;
    }
    const GraphStats gs = graph_stats(rank_graph);
    c.g1 = gs.g1;
    c.g2 = gs.g2;
    c.g3 = gs.g3;
    const double nd = static_cast<double>(rank_graph.n);
    c.s2 = c.a_hat * (c.g1 + c.g3 - 2.0 / (nd - 1.0)) +
           c.b_hat * (c.g2 - 2.0 * c.g1 - 2.0 * c.g3 - 1.0 + 4.0 / (nd - 1.0)) +
           c.c_hat * (c.g1 + c.g3 - c.g2 + (nd - 3.0) / (nd - 1.0));
    return c;
}

double chatterjee_xi(const DataMatrix& x1d, const DataMatrix& y1d) {
    if (x1d.cols() != 1 || y1d.cols() != 1)
        throw ConfigError("chatterjee_xi requires univariate samples");
    const std::size_t n = x1d.rows();
    if (n < 2 || y1d.rows() != n) throw ConfigError("chatterjee_xi needs n >= 2 paired rows");

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (x1d.at(a, 0) != x1d.at(b, 0)) return x1d.at(a, 0) < x1d.at(b, 0);
        return a < b;  // ties in x broken by index
    });

    // ranks of y (ties by index, matching the continuous-marginal setting)
    std::vector<std::uint32_t> yorder(n);
    std::iota(yorder.begin(), yorder.end(), 0);
    std::sort(yorder.begin(), yorder.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (y1d.at(a, 0) != y1d.at(b, 0)) return y1d.at(a, 0) < y1d.at(b, 0);
        return a < b;
    });
    std::vector<double> rank(n);
    for (std::size_t t = 0; t < n; ++t) rank[yorder[t]] = static_cast<double>(t + 1);

    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < n; ++t)
        acc += std::abs(rank[order[t + 1]] - rank[order[t]]);
    const double nd = static_cast<double>(n);
    return 1.0 - 3.0 * acc / (nd * nd - 1.0);
}

}  // namespace kmac
