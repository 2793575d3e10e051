#include "kmac/geograph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "kmac/kdtree.hpp"
#include "kmac/parallel.hpp"
#include "kmac/simd.hpp"

namespace kmac {

namespace {

constexpr std::size_t kKdTreeMaxDim = 16;
constexpr std::size_t kMstGuard = 20000;

void check_points(const DataMatrix& x) {
    if (x.rows() < 2) throw ConfigError("graph construction needs at least 2 rows");
    if (!x.all_finite()) throw ConfigError("non-finite coordinates");
}

GeoGraph symmetrize(std::vector<std::vector<std::uint32_t>> out_edges,
                    std::shared_ptr<const DataMatrix> pts) {
    const std::size_t n = out_edges.size();
    GeoGraph g;
    g.n = n;
    g.points = std::move(pts);
    g.adjacency.resize(n);
    g.degrees.resize(n);
    std::vector<std::uint32_t> counts(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t j : out_edges[i]) {
            ++counts[i];
            ++counts[j];
        }
    for (std::size_t i = 0; i < n; ++i) g.adjacency[i].reserve(counts[i]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t j : out_edges[i]) {
            g.adjacency[i].push_back(j);
            g.adjacency[j].push_back(static_cast<std::uint32_t>(i));
        }
    for (std::size_t i = 0; i < n; ++i) {
        auto& a = g.adjacency[i];
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        g.degrees[i] = static_cast<std::uint32_t>(a.size());
    }
    return g;
}

std::vector<std::uint32_t> brute_knn(const DataMatrix& x, std::size_t i, std::size_t k,
                                     TieRule tie, std::uint64_t seed) {
    const std::size_t n = x.rows();
    std::vector<detail::Cand> cands;
    cands.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d2 = sq_dist(x.row(i), x.row(j), x.cols());
        const std::uint64_t key =
            tie == TieRule::ByIndex ? j : mix64(seed ^ mix64(i * 0x100000001B3ULL + j));
        cands.push_back({d2, key, static_cast<std::uint32_t>(j)});
    }
    std::nth_element(cands.begin(), cands.begin() + (k - 1), cands.end());
    cands.resize(k);
    std::sort(cands.begin(), cands.end());
    std::vector<std::uint32_t> out(k);
    for (std::size_t t = 0; t < k; ++t) out[t] = cands[t].idx;
    return out;
}

}  // namespace

std::size_t GeoGraph::min_degree() const {
    return *std::min_element(degrees.begin(), degrees.end());
}

std::size_t GeoGraph::max_degree() const {
    return *std::max_element(degrees.begin(), degrees.end());
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> GeoGraph::undirected_edges() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j : adjacency[i])
            if (i < j) edges.emplace_back(i, j);
    return edges;
}

GeoGraph build_knn(const DataMatrix& x, std::size_t k, TieRule tie_rule,
                   std::uint64_t seed) {
    check_points(x);
    const std::size_t n = x.rows();
    if (k < 1 || k > n - 1) throw ConfigError("knn: k must be in [1, n-1]");

    std::vector<std::vector<std::uint32_t>> out_edges(n);
    if (x.cols() <= kKdTreeMaxDim) {
        KdTree tree(x);
        parallel_for(n, [&](std::size_t i) {
            if (tie_rule == TieRule::ByIndex) {
                out_edges[i] = tree.query_knn(i, k, [](std::uint32_t j) {
                    return static_cast<std::uint64_t>(j);
                });
            } else {
                out_edges[i] = tree.query_knn(i, k, [&](std::uint32_t j) {
                    return mix64(seed ^ mix64(i * 0x100000001B3ULL + j));
                });
            }
        });
    } else {
        parallel_for(n, [&](std::size_t i) {
            out_edges[i] = brute_knn(x, i, k, tie_rule, seed);
        });
    }
    GeoGraph g = symmetrize(std::move(out_edges), std::make_shared<DataMatrix>(x));
    g.kind = GraphKind::Knn;
    g.k = k;
    g.tie_rule = tie_rule;
    g.tie_seed = seed;
    return g;
}

GeoGraph build_mst(const DataMatrix& x) {
    check_points(x);
    const std::size_t n = x.rows();
    if (n > kMstGuard)
        throw ConfigError("mst: dense Prim is guarded to n <= " + std::to_string(kMstGuard));

    bool all_same = true;
    for (std::size_t i = 1; i < n && all_same; ++i)
        if (sq_dist(x.row(0), x.row(i), x.cols()) > 0.0) all_same = false;
    if (all_same) throw DegenerateDataError("degenerate X sample: all points identical");

    // Prim over the dense distance matrix, distances recomputed on the fly.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n, kInf);
    std::vector<std::uint32_t> from(n, 0);
    std::vector<char> in_tree(n, 0);
    std::vector<std::vector<std::uint32_t>> out_edges(n);

    std::size_t cur = 0;
    in_tree[0] = 1;
    for (std::size_t added = 1; added < n; ++added) {
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double d2 = sq_dist(x.row(cur), x.row(j), x.cols());
            if (d2 < best[j]) {
                best[j] = d2;
                from[j] = static_cast<std::uint32_t>(cur);
            }
        }
        std::size_t pick = n;
        double pick_d = kInf;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            if (best[j] < pick_d || (best[j] == pick_d && j < pick)) {
                pick_d = best[j];
                pick = j;
            }
        }
        in_tree[pick] = 1;
        out_edges[from[pick]].push_back(static_cast<std::uint32_t>(pick));
        cur = pick;
    }

    GeoGraph g = symmetrize(std::move(out_edges), std::make_shared<DataMatrix>(x));
    g.kind = GraphKind::Mst;
    return g;
}

std::size_t common_neighbors(const GeoGraph& g, std::size_t i, std::size_t j) {
    if (i >= g.n || j >= g.n) throw ConfigError("common_neighbors: index out of range");
    if (i == j) return g.degrees[i];
    const auto& a = g.adjacency[i];
    const auto& b = g.adjacency[j];
    std::size_t count = 0, p = 0, q = 0;
    while (p < a.size() && q < b.size()) {
        if (a[p] == b[q]) {
            ++count;
            ++p;
            ++q;
        } else if (a[p] < b[q]) {
            ++p;
        } else {
            ++q;
        }
    }
    return count;
}

GraphStats graph_stats(const GeoGraph& g) {
    const std::size_t n = g.n;
    std::vector<double> inv_deg(n);
    for (std::size_t i = 0; i < n; ++i) inv_deg[i] = 1.0 / g.degrees[i];

    GraphStats s;
    s.g1 = simd::det_sum(inv_deg.data(), n) / static_cast<double>(n);

    // sum_{i,j} T(i,j)/(d_i d_j) = sum_k (sum_{i in adj(k)} 1/d_i)^2
    std::vector<double> sk(n);
    std::vector<double> g3_rows(n);
    for (std::size_t kv = 0; kv < n; ++kv) {
        double acc = 0.0;
        for (std::uint32_t i : g.adjacency[kv]) acc += inv_deg[i];
        sk[kv] = acc * acc;
        g3_rows[kv] = inv_deg[kv] * acc;
    }
    s.g2 = simd::det_sum(sk.data(), n) / static_cast<double>(n);
    s.g3 = simd::det_sum(g3_rows.data(), n) / static_cast<double>(n);
    return s;
}

GraphDiagnostics assumption_report(const GeoGraph& g) {
    if (!g.points) throw ConfigError("assumption_report: graph has no point data");
    GraphDiagnostics d;
    d.min_degree = g.min_degree();
    d.max_degree = g.max_degree();
    const auto edges = g.undirected_edges();
    double total = 0.0;
    for (auto [i, j] : edges)
        total += std::sqrt(sq_dist(g.points->row(i), g.points->row(j), g.points->cols()));
    d.mean_edge_length = edges.empty() ? 0.0 : total / static_cast<double>(edges.size());
    d.common_neighbor_total = graph_stats(g).g2;
    return d;
}

std::size_t locality_probe(const GeoGraph& g, std::size_t probes, std::uint64_t seed) {
    if (!g.points) throw ConfigError("locality_probe: graph has no point data");
    const DataMatrix& x = *g.points;
    auto base_edges = g.undirected_edges();
    std::set<std::pair<std::uint32_t, std::uint32_t>> base(base_edges.begin(),
                                                           base_edges.end());
    CounterRng rng = CounterRng::derive(seed, 0x9b);
    std::size_t worst = 0;
    for (std::size_t p = 0; p < probes; ++p) {
        const std::size_t v = rng.next_below(g.n);
        const std::size_t r = rng.next_below(g.n);
        DataMatrix xp = x;
        for (std::size_t c = 0; c < x.cols(); ++c) xp.at(v, c) = x.at(r, c);
        GeoGraph gp;
        if (g.kind == GraphKind::Knn)
            gp = build_knn(xp, g.k, g.tie_rule, g.tie_seed);
        else
            gp = build_mst(xp);
        auto new_edges = gp.undirected_edges();
        std::set<std::pair<std::uint32_t, std::uint32_t>> now(new_edges.begin(),
                                                              new_edges.end());
        std::size_t diff = 0;
        for (const auto& e : base)
            if (!now.count(e)) ++diff;
        std::size_t diff2 = 0;
        for (const auto& e : now)
            if (!base.count(e)) ++diff2;
        worst = std::max({worst, diff, diff2});
    }
    return worst;
}

std::string GraphSpec::to_string() const {
    if (kind == GraphKind::Mst) return "mst";
    std::string s = "knn:k=" + std::to_string(k);
    if (tie_rule == TieRule::SeededRandom)
        s += ",tie=random,seed=" + std::to_string(seed);
    return s;
}

GraphSpec parse_graph_spec(const std::string& s) {
    GraphSpec spec;
    std::string head = s, args;
    if (const auto pos = s.find(':'); pos != std::string::npos) {
        head = s.substr(0, pos);
        args = s.substr(pos + 1);
    }
    if (head == "mst") {
        spec.kind = GraphKind::Mst;
        if (!args.empty()) throw ConfigError("mst takes no options");
        return spec;
    }
    if (head != "knn") throw ConfigError("unknown graph kind: " + head);
    spec.kind = GraphKind::Knn;
    std::size_t start = 0;
    while (start < args.size()) {
        auto end = args.find(',', start);
        if (end == std::string::npos) end = args.size();
        const std::string kv = args.substr(start, end - start);
        start = end + 1;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("bad graph option: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            if (key == "k")
                spec.k = static_cast<std::size_t>(std::stoull(val));
            else if (key == "tie") {
                if (val == "index")
                    spec.tie_rule = TieRule::ByIndex;
                else if (val == "random")
                    spec.tie_rule = TieRule::SeededRandom;
                else
                    throw ConfigError("unknown tie rule: " + val);
            } else if (key == "seed")
                spec.seed = std::stoull(val);
            else
                throw ConfigError("unknown graph option: " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad graph option value: " + kv);
        }
    }
    if (spec.k < 1) throw ConfigError("knn requires k >= 1");
    return spec;
}

GeoGraph build_graph(const GraphSpec& spec, const DataMatrix& x) {
    if (spec.kind == GraphKind::Mst) return build_mst(x);
    return build_knn(x, spec.k, spec.tie_rule, spec.seed);
}

std::string dump_edges_csv(const GeoGraph& g) {
    std::ostringstream out;
    out << "i,j,length\n";
    out.precision(17);
    for (auto [i, j] : g.undirected_edges()) {
        double len = 0.0;
        if (g.points)
            len = std::sqrt(sq_dist(g.points->row(i), g.points->row(j), g.points->cols()));
        out << i << ',' << j << ',' << len << '\n';
    }
    return out.str();
}

}  // namespace kmac
