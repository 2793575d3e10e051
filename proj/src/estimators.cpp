#include "kmac/estimators.hpp"

#include <cmath>

#include "kmac/parallel.hpp"
#include "kmac/simd.hpp"

namespace kmac {

namespace {

void check_pair(const DataMatrix& x, const DataMatrix& y, const GeoGraph& graph,
                std::size_t min_n) {
    if (x.rows() != y.rows()) throw ConfigError("x and y must have the same row count");
    if (graph.n != x.rows()) throw ConfigError("graph size does not match sample size");
    if (x.rows() < min_n)
        throw ConfigError("estimator needs at least " + std::to_string(min_n) + " rows");
    if (!y.all_finite()) throw ConfigError("non-finite values in y");
}

}  // namespace

std::string kind_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Standard: return "standard";
        case EstimatorKind::Linear: return "linear";
        case EstimatorKind::Rank: return "rank";
    }
    return "?";
}

EstimatorKind parse_estimator_kind(const std::string& s) {
    if (s == "standard") return EstimatorKind::Standard;
    if (s == "linear") return EstimatorKind::Linear;
    if (s == "rank") return EstimatorKind::Rank;
    throw ConfigError("unknown estimator kind: " + s);
}

namespace detail {

double self_term(const KernelSpec& kernel, const DataMatrix& y) {
    const auto diag = kernel_self_diag(kernel, y);
    return simd::det_sum(diag.data(), diag.size()) / static_cast<double>(diag.size());
}

double cross_term_ustat(const KernelRowEval& ke) {
    const std::size_t n = ke.size();
    std::vector<double> row_sums(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        if (i + 1 >= n) return;
        std::vector<double> buf(n - i - 1);
        ke.fill(i, i + 1, n, buf.data());
        row_sums[i] = simd::det_sum(buf.data(), buf.size());
    });
    const double half = simd::det_sum(row_sums.data(), n);
    return 2.0 * half / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double cyclic_term(const KernelSpec& kernel, const DataMatrix& y) {
    const std::size_t n = y.rows();
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1 == n) ? 0 : i + 1;
        vals[i] = kernel_eval(kernel, y.row_span(i), y.row_span(j));
    }
    return simd::det_sum(vals.data(), n) / static_cast<double>(n);
}

double graph_term(const KernelSpec& kernel, const DataMatrix& y, const GeoGraph& graph) {
    const std::size_t n = graph.n;
    std::vector<double> per_vertex(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto& adj = graph.adjacency[i];
        std::vector<double> buf(adj.size());
        for (std::size_t t = 0; t < adj.size(); ++t)
            buf[t] = kernel_eval(kernel, y.row_span(i), y.row_span(adj[t]));
        per_vertex[i] = simd::det_sum(buf.data(), buf.size()) / graph.degrees[i];
    });
    return simd::det_sum(per_vertex.data(), n) / static_cast<double>(n);
}

void check_denominator(double denom, double self) {
    if (std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(self)))
        throw DegenerateDataError("degenerate Y marginal");
}

}  // namespace detail

AssociationEstimate eta_hat(const DataMatrix& x, const DataMatrix& y,
                            const KernelSpec& kernel, const GeoGraph& graph) {
    check_pair(x, y, graph, 4);
    const KernelSpec ks = resolve_bandwidth(kernel, y);
    KernelRowEval ke(ks, y);

    AssociationEstimate est;
    est.n = y.rows();
    est.kind = EstimatorKind::Standard;
    est.graph_term = detail::graph_term(ks, y, graph);
    est.cross_term = detail::cross_term_ustat(ke);
    est.self_term = detail::self_term(ks, y);
    est.numerator = est.graph_term - est.cross_term;
    est.denominator = est.self_term - est.cross_term;
    detail::check_denominator(est.denominator, est.self_term);
    est.value = est.numerator / est.denominator;
    return est;
}

AssociationEstimate t_n_energy(const DataMatrix& x, const DataMatrix& y,
                               const GeoGraph& graph) {
    check_pair(x, y, graph, 4);
    const std::size_t n = y.rows();
    const std::size_t d = y.cols();
    const ColMatrix cols(y);
    std::vector<const double*> colp(d);
    for (std::size_t k = 0; k < d; ++k) colp[k] = cols.col(k);

    // mean pairwise distance over ordered pairs
    std::vector<double> row_sums(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        if (i + 1 >= n) return;
        std::vector<double> buf(n - i - 1);
        std::vector<const double*> cp(d);
        for (std::size_t k = 0; k < d; ++k) cp[k] = cols.col(k) + (i + 1);
        simd::sqdist_row(cp.data(), d, buf.size(), y.row(i), buf.data());
        simd::sqrt_inplace(buf.data(), buf.size());
        row_sums[i] = simd::det_sum(buf.data(), buf.size());
    });
    const double cross_dist = 2.0 * simd::det_sum(row_sums.data(), n) /
                              (static_cast<double>(n) * static_cast<double>(n - 1));

    // degree-normalized graph distance
    std::vector<double> per_vertex(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto& adj = graph.adjacency[i];
        std::vector<double> buf(adj.size());
        for (std::size_t t = 0; t < adj.size(); ++t)
            buf[t] = std::sqrt(sq_dist(y.row(i), y.row(adj[t]), d));
        per_vertex[i] = simd::det_sum(buf.data(), buf.size()) / graph.degrees[i];
    });
    const double graph_dist = simd::det_sum(per_vertex.data(), n) / static_cast<double>(n);

    // degree-weight correction: (1/n) sum_j (w_j - 1) ||Y_j|| with
    // w_j = sum_{i in adj(j)} 1/d_i; zero on degree-regular graphs
    std::vector<double> corr_terms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double w = 0.0;
        for (std::uint32_t i : graph.adjacency[j]) w += 1.0 / graph.degrees[i];
        corr_terms[j] = (w - 1.0) * l2_norm(y.row(j), d);
    }
    const double correction = simd::det_sum(corr_terms.data(), n) / static_cast<double>(n);

    AssociationEstimate est;
    est.n = n;
    est.kind = EstimatorKind::Standard;
    est.graph_term = graph_dist;
    est.cross_term = cross_dist;
    est.self_term = 0.0;
    est.numerator = cross_dist - graph_dist + correction;
    est.denominator = cross_dist;
    detail::check_denominator(est.denominator, 1.0);
    est.value = est.numerator / est.denominator;
    return est;
}

AssociationEstimate eta_hat_lin(const DataMatrix& x, const DataMatrix& y,
                                const KernelSpec& kernel, const GeoGraph& graph) {
    check_pair(x, y, graph, 4);
    const KernelSpec ks = resolve_bandwidth(kernel, y);

    AssociationEstimate est;
    est.n = y.rows();
    est.kind = EstimatorKind::Linear;
    est.graph_term = detail::graph_term(ks, y, graph);
    est.cross_term = detail::cyclic_term(ks, y);
    est.self_term = detail::self_term(ks, y);
    est.numerator = est.graph_term - est.cross_term;
    est.denominator = est.self_term - est.cross_term;
    if (std::abs(est.denominator) <= 1e-12 * std::max(1.0, std::abs(est.self_term)))
        throw DegenerateDataError("degenerate cyclic denominator");
    est.value = est.numerator / est.denominator;
    return est;
}

double numerator_stat(EstimatorKind kind, const DataMatrix& x, const DataMatrix& y,
                      const KernelSpec& kernel, const GeoGraph& graph) {
    check_pair(x, y, graph, 4);
    const KernelSpec ks = resolve_bandwidth(kernel, y);
    const double gt = detail::graph_term(ks, y, graph);
    double cross;
    if (kind == EstimatorKind::Linear) {
        cross = detail::cyclic_term(ks, y);
    } else {
        KernelRowEval ke(ks, y);
        cross = detail::cross_term_ustat(ke);
    }
    return std::sqrt(static_cast<double>(y.rows())) * (gt - cross);
}

CltScaling clt_scaling_standard(const DataMatrix& y, const KernelSpec& kernel,
                                const GeoGraph& graph) {
    const std::size_t n = y.rows();
    if (n < 5) throw ConfigError("clt_scaling_standard needs n >= 5");
    if (graph.n != n) throw ConfigError("graph size does not match sample size");
    const KernelSpec ks = resolve_bandwidth(kernel, y);
    KernelRowEval ke(ks, y);

    // Row sums of the Gram matrix give the distinct-tuple moments without
    // the literal 3- and 4-index loops.
    std::vector<double> r(n), s2row(n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> buf(n);
        ke.fill_row(i, buf.data());
        buf[i] = 0.0;
        r[i] = simd::det_sum(buf.data(), n);
        for (std::size_t j = 0; j < n; ++j) buf[j] *= buf[j];
        s2row[i] = simd::det_sum(buf.data(), n);
    });
    const double S1 = simd::det_sum(r.data(), n);
    const double S2 = simd::det_sum(s2row.data(), n);
    std::vector<double> r2(n);
    for (std::size_t i = 0; i < n; ++i) r2[i] = r[i] * r[i];
    const double R2 = simd::det_sum(r2.data(), n);

    const double nd = static_cast<double>(n);
    const double pairs = nd * (nd - 1.0);
    const double triples = pairs * (nd - 2.0);
    const double quads = triples * (nd - 3.0);
    const double B = R2 - S2;

    CltScaling c;
    c.a_hat = S2 / pairs;
    c.b_hat = B / triples;
    c.c_hat = (S1 * S1 - 2.0 * S2 - 4.0 * B) / quads;
    const GraphStats gs = graph_stats(graph);
    c.g1 = gs.g1;
    c.g2 = gs.g2;
    c.g3 = gs.g3;
    c.s2 = c.a_hat * (c.g1 + c.g3 - 2.0 / (nd - 1.0)) +
           c.b_hat * (c.g2 - 2.0 * c.g1 - 2.0 * c.g3 - 1.0 + 4.0 / (nd - 1.0)) +
           c.c_hat * (c.g1 + c.g3 - c.g2 + (nd - 3.0) / (nd - 1.0));
    return c;
}

CltScaling clt_scaling_linear(const DataMatrix& y, const KernelSpec& kernel,
                              const GeoGraph& graph) {
    const std::size_t n = y.rows();
    if (n < 4) throw ConfigError("clt_scaling_linear needs n >= 4");
    if (graph.n != n) throw ConfigError("graph size does not match sample size");
    const KernelSpec ks = resolve_bandwidth(kernel, y);

    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1 == n) ? 0 : i + 1;
        e[i] = kernel_eval(ks, y.row_span(i), y.row_span(j));
    }
    std::vector<double> ta(n), tb(n), tc(n);
    for (std::size_t i = 0; i < n; ++i) {
        ta[i] = e[i] * e[i];
        tb[i] = e[i] * e[(i + 1) % n];
        tc[i] = e[i] * e[(i + 2) % n];
    }
    const double nd = static_cast<double>(n);
    CltScaling c;
    c.a_hat = simd::det_sum(ta.data(), n) / nd;
    c.b_hat = simd::det_sum(tb.data(), n) / nd;
    c.c_hat = simd::det_sum(tc.data(), n) / nd;
    const GraphStats gs = graph_stats(graph);
    c.g1 = gs.g1;
    c.g2 = gs.g2;
    c.g3 = gs.g3;
    c.s2 = c.a_hat * (c.g1 + c.g3 + 1.0) +
           c.b_hat * (c.g2 - 2.0 * c.g1 - 2.0 * c.g3 - 3.0) +
           c.c_hat * (2.0 + c.g1 + c.g3 - c.g2);
    return c;
}

}  // namespace kmac
