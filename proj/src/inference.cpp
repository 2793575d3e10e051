#include "kmac/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "kmac/parallel.hpp"
#include "kmac/rng.hpp"
#include "kmac/simd.hpp"
#include "kmac/stats.hpp"

namespace kmac {

namespace {

constexpr std::size_t kGramCap = 2048;     // materialize the kernel matrix below this
constexpr std::size_t kBaselineCap = 3000; // dcov/hsic memory guard
constexpr double kVarFloor = 1e-12;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Lexicographic row order of (x, y); permutations are generated in this
// order so that common row reordering cannot change a seeded test.
std::vector<std::uint32_t> canonical_order(const DataMatrix& x, const DataMatrix& y) {
    std::vector<std::uint32_t> can(x.rows());
    std::iota(can.begin(), can.end(), 0);
    auto row_less = [](const double* a, const double* b, std::size_t d) -> int {
        for (std::size_t k = 0; k < d; ++k) {
            if (a[k] < b[k]) return -1;
            if (a[k] > b[k]) return 1;
        }
        return 0;
    };
    std::sort(can.begin(), can.end(), [&](std::uint32_t u, std::uint32_t v) {
        const int cx = row_less(x.row(u), x.row(v), x.cols());
        if (cx != 0) return cx < 0;
        const int cy = row_less(y.row(u), y.row(v), y.cols());
        if (cy != 0) return cy < 0;
        return u < v;
    });
    return can;
}

// vertex -> y-row map for replicate sigma drawn in canonical space
std::vector<std::uint32_t> compose_permutation(const std::vector<std::uint32_t>& can,
                                               const std::vector<std::uint32_t>& canpos,
                                               const std::vector<std::uint32_t>& sigma) {
    std::vector<std::uint32_t> pi(can.size());
    for (std::size_t v = 0; v < can.size(); ++v) pi[v] = can[sigma[canpos[v]]];
    return pi;
}

struct PermStatEngine {
    const GeoGraph& graph;
    const DataMatrix& y;
    const KernelSpec& kernel;
    EstimatorKind kind;
    double fixed_cross = 0.0;       // U-statistic cross term (Standard/Rank)
    std::vector<double> gram;       // n x n when n <= kGramCap
    bool use_gram = false;
    double sqrt_n = 0.0;

    PermStatEngine(const GeoGraph& g, const DataMatrix& yv, const KernelSpec& ks,
                   EstimatorKind kd)
        : graph(g), y(yv), kernel(ks), kind(kd) {
        const std::size_t n = g.n;
        sqrt_n = std::sqrt(static_cast<double>(n));
        if (kind != EstimatorKind::Linear) {
            KernelRowEval ke(kernel, y);
            fixed_cross = detail::cross_term_ustat(ke);
        }
        if (n <= kGramCap) {
            use_gram = true;
            gram.resize(n * n);
            KernelRowEval ke(kernel, y);
            parallel_for(n, [&](std::size_t i) { ke.fill_row(i, gram.data() + i * n); });
        }
    }

    double kv(std::uint32_t a, std::uint32_t b) const {
        if (use_gram) return gram[static_cast<std::size_t>(a) * graph.n + b];
        return kernel_eval(kernel, y.row_span(a), y.row_span(b));
    }

    // sqrt(n) * (graph_term - cross_term) for y rows rearranged by pi
    double statistic(const std::vector<std::uint32_t>& pi, std::vector<double>& scratch,
                     std::vector<double>& per_vertex) const {
        const std::size_t n = graph.n;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& adj = graph.adjacency[i];
            scratch.resize(adj.size());
            for (std::size_t t = 0; t < adj.size(); ++t)
                scratch[t] = kv(pi[i], pi[adj[t]]);
            per_vertex[i] =
                simd::det_sum(scratch.data(), scratch.size()) / graph.degrees[i];
        }
        const double gt = simd::det_sum(per_vertex.data(), n) / static_cast<double>(n);
        double cross = fixed_cross;
        if (kind == EstimatorKind::Linear) {
            scratch.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = (i + 1 == n) ? 0 : i + 1;
                scratch[i] = kv(pi[i], pi[j]);
            }
            cross = simd::det_sum(scratch.data(), n) / static_cast<double>(n);
        }
        return sqrt_n * (gt - cross);
    }
};

struct BaselineMatrices {
    std::vector<double> A, B;
    std::size_t n = 0;
    double var_a = 0.0, var_b = 0.0;
};

void double_center(std::vector<double>& m, std::size_t n) {
    std::vector<double> row_mean(n);
    for (std::size_t i = 0; i < n; ++i)
        row_mean[i] = simd::det_sum(m.data() + i * n, n) / static_cast<double>(n);
    const double grand = simd::det_sum(row_mean.data(), n) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m[i * n + j] += grand - row_mean[i] - row_mean[j];
}

std::vector<double> pairwise_distance_matrix(const DataMatrix& x) {
    const std::size_t n = x.rows(), d = x.cols();
    const ColMatrix cols(x);
    std::vector<double> m(n * n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<const double*> cp(d);
        for (std::size_t k = 0; k < d; ++k) cp[k] = cols.col(k);
        double* row = m.data() + i * n;
        simd::sqdist_row(cp.data(), d, n, x.row(i), row);
        simd::sqrt_inplace(row, n);
    });
    return m;
}

std::vector<double> gram_matrix(const DataMatrix& x, const KernelSpec& kernel) {
    const std::size_t n = x.rows();
    const KernelSpec ks = resolve_bandwidth(kernel, x);
    KernelRowEval ke(ks, x);
    std::vector<double> m(n * n);
    parallel_for(n, [&](std::size_t i) { ke.fill_row(i, m.data() + i * n); });
    return m;
}

TestReport run_baseline_permutation(const DataMatrix& x, const DataMatrix& y,
                                    BaselineMatrices mats, std::size_t B,
                                    std::uint64_t seed, const std::string& method) {
    const auto t0 = Clock::now();
    const std::size_t n = mats.n;
    if (B < 19) throw ConfigError("permutation test needs B >= 19");

    const auto can = canonical_order(x, y);
    std::vector<std::uint32_t> canpos(n);
    for (std::uint32_t t = 0; t < n; ++t) canpos[can[t]] = t;
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);

    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    const double observed = simd::perm_qform(mats.A.data(), mats.B.data(), identity.data(), n) / n2;

    std::vector<double> stats(B);
    parallel_for(B, [&](std::size_t b) {
        CounterRng rng = CounterRng::derive(seed, b + 1);
        const auto sigma = rng.permutation(n);
        const auto pi = compose_permutation(can, canpos, sigma);
        stats[b] = simd::perm_qform(mats.A.data(), mats.B.data(), pi.data(), n) / n2;
    });
    std::size_t count = 0;
    for (double s : stats)
        if (s >= observed) ++count;

    TestReport rep;
    rep.statistic = observed;
    rep.z = std::numeric_limits<double>::quiet_NaN();
    rep.p_value = (1.0 + static_cast<double>(count)) / (static_cast<double>(B) + 1.0);
    rep.method = method;
    const double denom = std::sqrt(mats.var_a * mats.var_b);
    rep.estimator_value = denom > 0.0 ? observed / denom : 0.0;
    rep.seed = seed;
    rep.B = B;
    rep.runtime_ms = elapsed_ms(t0);
    return rep;
}

struct RankPipeline {
    GeoGraph graph;
    DataMatrix rank_y;
    AssociationEstimate estimate;
    KernelSpec kernel;
};

RankPipeline make_rank_pipeline(const DataMatrix& x, const DataMatrix& y,
                                const KernelSpec& kernel, const GraphSpec& graph_spec,
                                const RankGrids& grids) {
    GridSpec gx = grids.grid_x.value_or(
        GridSpec{x.cols() == 1 ? GridSource::Lattice1d : GridSource::Halton, 0});
    GridSpec gy = grids.grid_y.value_or(
        GridSpec{y.cols() == 1 ? GridSource::Lattice1d : GridSource::Halton, 0});
    const TargetGrid grid_x = make_grid(gx, x.rows(), x.cols());
    const TargetGrid grid_y = make_grid(gy, y.rows(), y.cols());
    RankPipeline p;
    p.kernel = kernel;
    p.estimate = eta_hat_rank(x, y, kernel, graph_spec, grid_x, grid_y, &p.graph, &p.rank_y);
    return p;
}

void warn_noncharacteristic(const KernelSpec& kernel) {
    if (!kernel.is_characteristic())
        std::fprintf(stderr,
                     "warning: kernel '%s' is not characteristic; the test may miss "
                     "dependence\n",
                     kernel.to_string().c_str());
}

}  // namespace

TestReport asymptotic_test(EstimatorKind kind, const DataMatrix& x, const DataMatrix& y,
                           const KernelSpec& kernel, const GraphSpec& graph_spec,
                           const RankGrids& grids) {
    const auto t0 = Clock::now();
    warn_noncharacteristic(kernel);
    TestReport rep;
    rep.B = 0;

    double N = 0.0, s2 = 0.0;
    if (kind == EstimatorKind::Rank) {
        const RankPipeline p = make_rank_pipeline(x, y, kernel, graph_spec, grids);
        N = std::sqrt(static_cast<double>(y.rows())) * p.estimate.numerator;
        const KernelSpec ks = resolve_bandwidth(kernel, p.rank_y);
        s2 = rank_clt_scaling(ks, y.cols(), p.graph, grids.mc_nodes).s2;
        rep.estimator_value = p.estimate.value;
        rep.method = "asymptotic-rank";
    } else {
        const GeoGraph graph = build_graph(graph_spec, x);
        const KernelSpec ks = resolve_bandwidth(kernel, y);
        AssociationEstimate est;
        if (kind == EstimatorKind::Standard) {
            est = eta_hat(x, y, ks, graph);
            s2 = clt_scaling_standard(y, ks, graph).s2;
            rep.method = "asymptotic-standard";
        } else {
            est = eta_hat_lin(x, y, ks, graph);
            s2 = clt_scaling_linear(y, ks, graph).s2;
            rep.method = "asymptotic-linear";
        }
        N = std::sqrt(static_cast<double>(y.rows())) * est.numerator;
        rep.estimator_value = est.value;
    }
    if (!(s2 > kVarFloor))
        throw DegenerateDataError(
            "variance estimate is degenerate; use permutation calibration");
    rep.statistic = N;
    rep.z = N / std::sqrt(s2);
    rep.p_value = normal_upper_p(rep.z);
    rep.runtime_ms = elapsed_ms(t0);
    return rep;
}

TestReport permutation_test(EstimatorKind kind, const DataMatrix& x, const DataMatrix& y,
                            const KernelSpec& kernel, const GraphSpec& graph_spec,
                            std::size_t B, std::uint64_t seed, const RankGrids& grids) {
    const auto t0 = Clock::now();
    if (B < 19) throw ConfigError("permutation test needs B >= 19");
    const std::size_t n = x.rows();
    if (y.rows() != n) throw ConfigError("x and y must have the same row count");
    warn_noncharacteristic(kernel);

    TestReport rep;
    rep.seed = seed;
    rep.B = B;
    const std::string b_tag = "(B=" + std::to_string(B) + ")";

    // Fix the graph (built on x, or on the x-ranks) and the y values the
    // statistic sees; the rank estimator permutes through its ranks.
    GeoGraph graph;
    DataMatrix yv;
    KernelSpec ks = kernel;
    if (kind == EstimatorKind::Rank) {
        const RankPipeline p = make_rank_pipeline(x, y, kernel, graph_spec, grids);
        graph = p.graph;
        yv = p.rank_y;
        ks = resolve_bandwidth(kernel, yv);
        rep.estimator_value = p.estimate.value;
        rep.method = "permutation-rank" + b_tag;
    } else {
        graph = build_graph(graph_spec, x);
        yv = y;
        ks = resolve_bandwidth(kernel, yv);
        if (kind == EstimatorKind::Standard) {
            rep.estimator_value = eta_hat(x, yv, ks, graph).value;
            rep.method = "permutation-standard" + b_tag;
        } else {
            rep.estimator_value = eta_hat_lin(x, yv, ks, graph).value;
            rep.method = "permutation-linear" + b_tag;
        }
    }

    const PermStatEngine engine(graph, yv, ks, kind);
    const auto can = canonical_order(x, y);
    std::vector<std::uint32_t> canpos(n);
    for (std::uint32_t t = 0; t < n; ++t) canpos[can[t]] = t;

    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    std::vector<double> scratch, per_vertex(n);
    const double observed = engine.statistic(identity, scratch, per_vertex);

    std::vector<double> stats(B);
    parallel_for(B, [&](std::size_t b) {
        CounterRng rng = CounterRng::derive(seed, b + 1);
        const auto sigma = rng.permutation(n);
        const auto pi = compose_permutation(can, canpos, sigma);
        std::vector<double> sc, pv(n);
        stats[b] = engine.statistic(pi, sc, pv);
    });
    std::size_t count = 0;
    for (double s : stats)
        if (s >= observed) ++count;

    rep.statistic = observed;
    rep.z = std::numeric_limits<double>::quiet_NaN();
    rep.p_value = (1.0 + static_cast<double>(count)) / (static_cast<double>(B) + 1.0);
    rep.runtime_ms = elapsed_ms(t0);
    return rep;
}

double dcor_squared(const DataMatrix& x, const DataMatrix& y) {
    const std::size_t n = x.rows();
    if (n < 4 || y.rows() != n) throw ConfigError("dcor needs n >= 4 paired rows");
    if (n > kBaselineCap) throw ConfigError("dcor baseline guarded to n <= 3000");
    auto A = pairwise_distance_matrix(x);
    auto Bm = pairwise_distance_matrix(y);
    double_center(A, n);
    double_center(Bm, n);
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    const double dcov2 = simd::perm_qform(A.data(), Bm.data(), identity.data(), n) / n2;
    const double va = simd::perm_qform(A.data(), A.data(), identity.data(), n) / n2;
    const double vb = simd::perm_qform(Bm.data(), Bm.data(), identity.data(), n) / n2;
    const double denom = std::sqrt(va * vb);
    return denom > 0.0 ? dcov2 / denom : 0.0;
}

TestReport dcov_test(const DataMatrix& x, const DataMatrix& y, std::size_t B,
                     std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (n < 4 || y.rows() != n) throw ConfigError("dcov test needs n >= 4 paired rows");
    if (n > kBaselineCap) throw ConfigError("dcov baseline guarded to n <= 3000");
    BaselineMatrices mats;
    mats.n = n;
    mats.A = pairwise_distance_matrix(x);
    mats.B = pairwise_distance_matrix(y);
    double_center(mats.A, n);
    double_center(mats.B, n);
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    mats.var_a = simd::perm_qform(mats.A.data(), mats.A.data(), identity.data(), n) / n2;
    mats.var_b = simd::perm_qform(mats.B.data(), mats.B.data(), identity.data(), n) / n2;
    if (!(mats.var_a > 0.0) || !(mats.var_b > 0.0))
        throw DegenerateDataError("degenerate sample for dcov");
    return run_baseline_permutation(x, y, std::move(mats), B, seed,
                                    "permutation-dcov(B=" + std::to_string(B) + ")");
}

TestReport hsic_test(const DataMatrix& x, const DataMatrix& y, const KernelSpec& kernel,
                     std::size_t B, std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (n < 4 || y.rows() != n) throw ConfigError("hsic test needs n >= 4 paired rows");
    if (n > kBaselineCap) throw ConfigError("hsic baseline guarded to n <= 3000");
    BaselineMatrices mats;
    mats.n = n;
    mats.A = gram_matrix(x, kernel);
    mats.B = gram_matrix(y, kernel);
    double_center(mats.A, n);
    double_center(mats.B, n);
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    mats.var_a = simd::perm_qform(mats.A.data(), mats.A.data(), identity.data(), n) / n2;
    mats.var_b = simd::perm_qform(mats.B.data(), mats.B.data(), identity.data(), n) / n2;
    if (!(mats.var_a > 0.0) || !(mats.var_b > 0.0))
        throw DegenerateDataError("degenerate sample for hsic");
    return run_baseline_permutation(x, y, std::move(mats), B, seed,
                                    "permutation-hsic(B=" + std::to_string(B) + ")");
}

}  // namespace kmac
