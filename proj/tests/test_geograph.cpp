#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "kmac/geograph.hpp"
#include "kmac/kdtree.hpp"
#include "kmac/rng.hpp"
#include "testlib.hpp"

using namespace kmac;

namespace {

DataMatrix col(std::vector<double> vals) {
    DataMatrix m(vals.size(), 1);
    for (std::size_t i = 0; i < vals.size(); ++i) m.at(i, 0) = vals[i];
    return m;
}

// Independent symmetrized k-NN built from the full distance matrix.
std::vector<std::set<std::uint32_t>> brute_sym_knn(const DataMatrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    std::vector<std::set<std::uint32_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::uint32_t>> cand;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                cand.emplace_back(sq_dist(x.row(i), x.row(j), x.cols()),
                                  static_cast<std::uint32_t>(j));
        std::sort(cand.begin(), cand.end());
        for (std::size_t t = 0; t < k; ++t) {
            adj[i].insert(cand[t].second);
            adj[cand[t].second].insert(static_cast<std::uint32_t>(i));
        }
    }
    return adj;
}

}  // namespace

TEST_CASE("forced nearest neighbors on the line") {
    const auto g = build_knn(col({0.0, 1.0, 10.0}), 1);
    CHECK(g.adjacency[0] == std::vector<std::uint32_t>{1});
    CHECK(g.adjacency[1] == std::vector<std::uint32_t>{0, 2});
    CHECK(g.adjacency[2] == std::vector<std::uint32_t>{1});
    CHECK(g.degrees == std::vector<std::uint32_t>{1, 2, 1});
}

TEST_CASE("2-nn on four collinear points matches the brute-force closure") {
    const auto x = col({0.0, 1.0, 2.0, 3.0});
    const auto g = build_knn(x, 2);
    // interior points keep both immediate neighbors
    CHECK(std::count(g.adjacency[1].begin(), g.adjacency[1].end(), 0) == 1);
    CHECK(std::count(g.adjacency[1].begin(), g.adjacency[1].end(), 2) == 1);
    CHECK(std::count(g.adjacency[2].begin(), g.adjacency[2].end(), 1) == 1);
    CHECK(std::count(g.adjacency[2].begin(), g.adjacency[2].end(), 3) == 1);
    const auto ref = brute_sym_knn(x, 2);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(g.adjacency[i] == std::vector<std::uint32_t>(ref[i].begin(), ref[i].end()));
}

TEST_CASE("duplicate rows with index ties are deterministic") {
    DataMatrix x(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        x.at(i, 0) = static_cast<double>(i % 2);  // three identical copies of two points
        x.at(i, 1) = 0.0;
    }
    const auto g1 = build_knn(x, 2, TieRule::ByIndex);
    const auto g2 = build_knn(x, 2, TieRule::ByIndex);
    CHECK(g1.adjacency == g2.adjacency);
    const auto r1 = build_knn(x, 2, TieRule::SeededRandom, 99);
    const auto r2 = build_knn(x, 2, TieRule::SeededRandom, 99);
    CHECK(r1.adjacency == r2.adjacency);
}

TEST_CASE("directed out-neighbors are the k smallest distance-matrix entries") {
    CounterRng rng(69);
    const auto x = testlib::random_matrix(200, 2, rng);
    KdTree tree(x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto got =
            tree.query_knn(i, 5, [](std::uint32_t j) { return std::uint64_t(j); });
        std::vector<std::pair<double, std::uint32_t>> cand;
        for (std::size_t j = 0; j < x.rows(); ++j)
            if (j != i)
                cand.emplace_back(sq_dist(x.row(i), x.row(j), x.cols()),
                                  static_cast<std::uint32_t>(j));
        std::sort(cand.begin(), cand.end());
        for (std::size_t t = 0; t < 5; ++t) CHECK(got[t] == cand[t].second);
    }
}

TEST_CASE("kd-tree path equals the brute-force distance matrix on distinct distances") {
    CounterRng rng(71);
    const auto x = testlib::random_matrix(200, 3, rng);
    const auto g = build_knn(x, 7);
    const auto ref = brute_sym_knn(x, 7);
    for (std::size_t i = 0; i < x.rows(); ++i)
        CHECK(g.adjacency[i] == std::vector<std::uint32_t>(ref[i].begin(), ref[i].end()));

    // high-dimensional fallback agrees too
    const auto xh = testlib::random_matrix(80, 20, rng);
    const auto gh = build_knn(xh, 4);
    const auto refh = brute_sym_knn(xh, 4);
    for (std::size_t i = 0; i < xh.rows(); ++i)
        CHECK(gh.adjacency[i] == std::vector<std::uint32_t>(refh[i].begin(), refh[i].end()));
}

TEST_CASE("knn input validation") {
    const auto x = col({0.0, 1.0});
    CHECK_THROWS_AS(build_knn(x, 0), ConfigError);
    CHECK_THROWS_AS(build_knn(x, 2), ConfigError);
    CHECK_THROWS_AS(build_knn(col({1.0}), 1), ConfigError);
    DataMatrix bad(3, 1);
    bad.at(1, 0) = std::nan("");
    CHECK_THROWS_AS(build_knn(bad, 1), ConfigError);
}

TEST_CASE("mst on forced configurations") {
    const auto g = build_mst(col({0.0, 1.0, 3.0}));
    CHECK(g.undirected_edges() ==
          std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 2}});

    const auto g2 = build_mst(col({5.0, -1.0}));
    CHECK(g2.degrees == std::vector<std::uint32_t>{1, 1});
    CHECK(g2.undirected_edges().size() == 1);

    DataMatrix same(4, 2, 1.5);
    CHECK_THROWS_AS(build_mst(same), DegenerateDataError);
}

TEST_CASE("mst weight is optimal against spanning-tree enumeration") {
    CounterRng rng(73);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + trial % 4;  // up to 7
        const auto x = testlib::random_matrix(n, 2, rng);
        const auto g = build_mst(x);
        CHECK(g.undirected_edges().size() == n - 1);
        const double got = testlib::mst_weight(g);
        const double best = testlib::min_spanning_weight_exhaustive(x);
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("common neighbor counts") {
    const auto path = build_knn(col({0.0, 1.0, 2.1}), 1);  // path 0-1-2
    CHECK(common_neighbors(path, 0, 2) == 1);
    CHECK(common_neighbors(path, 0, 1) == 0);
    CHECK(common_neighbors(path, 1, 1) == path.degrees[1]);
    CHECK_THROWS_AS(common_neighbors(path, 0, 5), ConfigError);

    // 4-clique via 3-nn on 4 points
    CounterRng rng(79);
    const auto x = testlib::random_matrix(4, 2, rng);
    const auto clique = build_knn(x, 3);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (i != j) CHECK(common_neighbors(clique, i, j) == 2);
}

TEST_CASE("graph statistics against the double-loop oracle") {
    {
        const auto g = build_mst(col({0.0, 1.0}));  // single edge
        const auto s = graph_stats(g);
        CHECK(s.g1 == doctest::Approx(1.0));
        CHECK(s.g2 == doctest::Approx(1.0));
        CHECK(s.g3 == doctest::Approx(1.0));
    }
    CounterRng rng(83);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = testlib::random_matrix(30, 2, rng);
        const auto g = trial % 2 ? build_mst(x) : build_knn(x, 1 + trial % 4);
        const auto fast = graph_stats(g);
        const auto slow = testlib::naive_graph_stats(g);
        CHECK(fast.g1 == doctest::Approx(slow.g1).epsilon(1e-12));
        CHECK(fast.g2 == doctest::Approx(slow.g2).epsilon(1e-12));
        CHECK(fast.g3 == doctest::Approx(slow.g3).epsilon(1e-12));

        const double t_over_r =
            static_cast<double>(g.max_degree()) / static_cast<double>(g.min_degree());
        CHECK(fast.g1 > 0.0);
        CHECK(fast.g1 <= 1.0);
        CHECK(fast.g3 > 0.0);
        CHECK(fast.g3 <= 1.0);
        CHECK(fast.g2 <= t_over_r * t_over_r + fast.g1 * g.max_degree() + 1e-12);
    }
}

TEST_CASE("all-equal-degree graphs have g1 = 1/degree") {
    // 1-nn on well-separated pairs gives a perfect matching: all degrees 1
    DataMatrix pairs(6, 1);
    const double xs[6] = {0.0, 0.1, 10.0, 10.1, 20.0, 20.1};
    for (int i = 0; i < 6; ++i) pairs.at(i, 0) = xs[i];
    const auto g = build_knn(pairs, 1);
    CHECK(g.min_degree() == 1);
    CHECK(g.max_degree() == 1);
    CHECK(graph_stats(g).g1 == doctest::Approx(1.0));
}

TEST_CASE("assumption report") {
    CounterRng rng(89);
    const auto x = testlib::random_matrix(100, 2, rng);
    const auto g = build_knn(x, 3);
    const auto d = assumption_report(g);
    CHECK(d.min_degree >= 3);
    CHECK(d.max_degree >= d.min_degree);
    CHECK(d.mean_edge_length > 0.0);
    CHECK(d.common_neighbor_total == doctest::Approx(graph_stats(g).g2));

    const auto pair = build_mst(col({2.0, 5.0}));
    CHECK(assumption_report(pair).mean_edge_length == doctest::Approx(3.0));

    // planar MSTs have small maximum degree
    for (int trial = 0; trial < 5; ++trial) {
        const auto pts = testlib::random_matrix(150, 2, rng);
        CHECK(assumption_report(build_mst(pts)).max_degree <= 6);
    }
}

TEST_CASE("rigid motions of the points leave the graph unchanged") {
    CounterRng rng(97);
    const auto x = testlib::random_matrix(50, 3, rng);
    const auto rot = testlib::random_rotation(3, rng);
    const auto moved = testlib::transform_rows(x, rot, {0.4, -2.0, 1.1});
    CHECK(build_knn(x, 3).adjacency == build_knn(moved, 3).adjacency);
    CHECK(build_mst(x).adjacency == build_mst(moved).adjacency);
}

TEST_CASE("vertex relabeling gives an isomorphic graph") {
    CounterRng rng(101);
    const auto x = testlib::random_matrix(40, 2, rng);
    const auto g = build_knn(x, 2);
    std::vector<std::size_t> perm(40);
    for (std::size_t i = 0; i < 40; ++i) perm[i] = (i * 7 + 3) % 40;
    const auto xp = testlib::permute_rows(x, perm);
    const auto gp = build_knn(xp, 2);
    // vertex i of gp corresponds to vertex perm[i] of g
    for (std::size_t i = 0; i < 40; ++i) {
        std::vector<std::uint32_t> expect;
        for (auto j : gp.adjacency[i]) expect.push_back(static_cast<std::uint32_t>(perm[j]));
        std::sort(expect.begin(), expect.end());
        CHECK(expect == g.adjacency[perm[i]]);
    }
}

TEST_CASE("locality probe stays small for nearest-neighbor graphs") {
    CounterRng rng(103);
    const auto x = testlib::random_matrix(120, 2, rng);
    const auto g = build_knn(x, 2);
    const std::size_t q = locality_probe(g, 5, 11);
    CHECK(q >= 1);
    CHECK(q <= 40);  // far below the edge count
}

TEST_CASE("graph spec strings") {
    const auto s1 = parse_graph_spec("knn:k=5");
    CHECK(s1.kind == GraphKind::Knn);
    CHECK(s1.k == 5);
    const auto s2 = parse_graph_spec("knn:k=1,tie=random,seed=7");
    CHECK(s2.tie_rule == TieRule::SeededRandom);
    CHECK(s2.seed == 7);
    CHECK(parse_graph_spec("mst").kind == GraphKind::Mst);
    CHECK_THROWS_AS(parse_graph_spec("knn:k=0"), ConfigError);
    CHECK_THROWS_AS(parse_graph_spec("tree"), ConfigError);
    CHECK_THROWS_AS(parse_graph_spec("mst:k=2"), ConfigError);
    CHECK(parse_graph_spec(s2.to_string()).seed == 7);
}

TEST_CASE("edge dump format") {
    const auto g = build_mst(col({0.0, 1.0, 3.0}));
    const auto csv = dump_edges_csv(g);
    CHECK(csv.find("i,j,length") == 0);
    CHECK(csv.find("0,1,1") != std::string::npos);
    CHECK(csv.find("1,2,2") != std::string::npos);
}
