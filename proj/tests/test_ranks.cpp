#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "kmac/ranks.hpp"
#include "kmac/rng.hpp"
#include "testlib.hpp"

using namespace kmac;

namespace {
KernelSpec K(const std::string& s) { return parse_kernel_spec(s); }
}  // namespace

TEST_CASE("halton points by hand") {
    const auto g1 = halton(4, 1);  // base 2
    CHECK(g1.points.at(0, 0) == doctest::Approx(0.5));
    CHECK(g1.points.at(1, 0) == doctest::Approx(0.25));
    CHECK(g1.points.at(2, 0) == doctest::Approx(0.75));
    CHECK(g1.points.at(3, 0) == doctest::Approx(0.125));

    const auto g2 = halton(2, 2);  // bases 2, 3
    CHECK(g2.points.at(0, 0) == doctest::Approx(0.5));
    CHECK(g2.points.at(0, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(g2.points.at(1, 0) == doctest::Approx(0.25));
    CHECK(g2.points.at(1, 1) == doctest::Approx(2.0 / 3.0));

    const auto big = halton(500, 5);
    for (std::size_t i = 0; i < big.size(); ++i)
        for (std::size_t k = 0; k < 5; ++k) {
            CHECK(big.points.at(i, k) > 0.0);
            CHECK(big.points.at(i, k) < 1.0);
        }
    CHECK_THROWS_AS(halton(4, 26), ConfigError);
}

TEST_CASE("grids") {
    const auto lat = lattice1d(4);
    CHECK(lat.points.at(0, 0) == doctest::Approx(0.25));
    CHECK(lat.points.at(3, 0) == doctest::Approx(1.0));

    const auto u1 = iid_uniform_grid(50, 3, 7);
    const auto u2 = iid_uniform_grid(50, 3, 7);
    CHECK(u1.points.data() == u2.points.data());

    CHECK(parse_grid_spec("halton").source == GridSource::Halton);
    CHECK(parse_grid_spec("lattice1d").source == GridSource::Lattice1d);
    CHECK(parse_grid_spec("uniform:seed=7").seed == 7);
    CHECK_THROWS_AS(parse_grid_spec("sobol"), ConfigError);
    CHECK_THROWS_AS(make_grid(parse_grid_spec("lattice1d"), 5, 2), ConfigError);
}

TEST_CASE("one-dimensional ranks reduce to sorting") {
    DataMatrix x(3, 1);
    x.at(0, 0) = 0.9;
    x.at(1, 0) = 0.1;
    x.at(2, 0) = 0.5;
    const auto a = solve_assignment(x, lattice1d(3));
    const auto ranks = apply_ranks(lattice1d(3), a);
    CHECK(ranks.at(0, 0) == doctest::Approx(1.0));
    CHECK(ranks.at(1, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(ranks.at(2, 0) == doctest::Approx(2.0 / 3.0));

    // classical ranks for any tie-free input
    CounterRng rng(41);
    DataMatrix z = testlib::random_matrix(100, 1, rng);
    const auto az = solve_assignment(z, lattice1d(100));
    std::vector<std::size_t> order(100);
    for (std::size_t i = 0; i < 100; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t p, std::size_t q) { return z.at(p, 0) < z.at(q, 0); });
    for (std::size_t r = 0; r < 100; ++r)
        CHECK(az.perm[order[r]] == static_cast<std::uint32_t>(r));
}

TEST_CASE("assignment optimality against enumeration") {
    CounterRng rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + trial % 6;  // up to 8
        const std::size_t d = trial % 2 ? 2 : 1;
        const auto x = testlib::random_matrix(n, d, rng);
        const auto grid =
            d == 1 ? (trial % 4 ? lattice1d(n) : halton(n, 1)) : halton(n, 2);
        const auto a = solve_assignment(x, grid);

        // bijection
        std::set<std::uint32_t> seen(a.perm.begin(), a.perm.end());
        CHECK(seen.size() == n);

        // recomputed cost and optimality
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            cost += sq_dist(x.row(i), grid.points.row(a.perm[i]), d);
        CHECK(a.cost == doctest::Approx(cost).epsilon(1e-9));
        const double best = testlib::brute_force_assignment_cost(x, grid.points);
        CHECK(a.cost == doctest::Approx(best).epsilon(1e-10));

        double identity_cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            identity_cost += sq_dist(x.row(i), grid.points.row(i), d);
        CHECK(a.cost <= identity_cost + 1e-12);
    }
}

TEST_CASE("assignment edge cases") {
    const auto grid = halton(6, 2);
    const auto a = solve_assignment(grid.points, grid);  // x equals the grid
    for (std::size_t i = 0; i < 6; ++i) CHECK(a.perm[i] == i);
    CHECK(a.cost == doctest::Approx(0.0));

    CounterRng rng(47);
    const auto x = testlib::random_matrix(5, 2, rng);
    CHECK_THROWS_AS(solve_assignment(x, halton(6, 2)), ConfigError);
    CHECK_THROWS_AS(solve_assignment(x, halton(5, 3)), ConfigError);

    DataMatrix big(8001, 1);
    for (std::size_t i = 0; i < 8001; ++i) big.at(i, 0) = static_cast<double>(i);
    CHECK_THROWS_AS(solve_assignment(big, lattice1d(8001)), ConfigError);
    CHECK_NOTHROW(solve_assignment(big, lattice1d(8001), /*allow_large=*/true));
}

TEST_CASE("rank multiset equals the grid multiset") {
    CounterRng rng(53);
    const auto x = testlib::random_matrix(40, 2, rng);
    const auto grid = halton(40, 2);
    const auto ranks = apply_ranks(grid, solve_assignment(x, grid));
    std::multiset<std::pair<double, double>> a, b;
    for (std::size_t i = 0; i < 40; ++i) {
        a.insert({ranks.at(i, 0), ranks.at(i, 1)});
        b.insert({grid.points.at(i, 0), grid.points.at(i, 1)});
    }
    CHECK(a == b);
}

TEST_CASE("rank estimator matches a from-scratch transcription") {
    CounterRng rng(59);
    const std::size_t n = 5;
    const auto x = testlib::random_matrix(n, 2, rng);
    const auto y = testlib::random_matrix(n, 1, rng);
    const auto gx = halton(n, 2);
    const auto gy = lattice1d(n);

    const auto est = eta_hat_rank(x, y, K("mincdf"), parse_graph_spec("knn:k=1"), gx, gy);
    CHECK(est.kind == EstimatorKind::Rank);

    const auto rx = apply_ranks(gx, solve_assignment(x, gx));
    const auto ry = apply_ranks(gy, solve_assignment(y, gy));
    const auto graph = build_knn(rx, 1);
    const auto naive = testlib::naive_eta(ry, K("mincdf"), graph);
    CHECK(est.value == doctest::Approx(naive.value).epsilon(1e-12));
}

TEST_CASE("uniform-law variance constants") {
    CounterRng rng(61);
    const auto x = testlib::random_matrix(100, 1, rng);
    const auto grid = lattice1d(100);
    const auto rx = apply_ranks(grid, solve_assignment(x, grid));
    const auto graph = build_knn(rx, 1);

    const auto c = rank_clt_scaling(K("mincdf"), 1, graph);
    CHECK(c.a_hat == doctest::Approx(1.0 / 6.0));
    CHECK(c.b_hat == doctest::Approx(2.0 / 15.0));
    CHECK(c.c_hat == doctest::Approx(1.0 / 9.0));

    // numeric integration oracle for the closed forms
    const std::size_t m = 2000;
    double a_num = 0.0, c_num = 0.0, b_num = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double u = (i + 0.5) / m;
        double inner = 0.0;  // E_v min(u,v)
        double inner2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double v = (j + 0.5) / m;
            inner += std::min(u, v);
            inner2 += std::min(u, v) * std::min(u, v);
        }
        inner /= m;
        inner2 /= m;
        a_num += inner2;
        b_num += inner * inner;
        c_num += inner;
    }
    a_num /= m;
    b_num /= m;
    c_num /= m;
    CHECK(a_num == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
    CHECK(b_num == doctest::Approx(2.0 / 15.0).epsilon(1e-4));
    CHECK(c_num * c_num == doctest::Approx(1.0 / 9.0).epsilon(1e-4));

    // constant kernel: variance collapses by telescoping.  Ranks live in
    // [0,1], so a constant field comes from a gaussian with huge bandwidth.
    KernelSpec flat = K("gaussian:sigma=1e9");
    const auto cf = rank_clt_scaling(flat, 1, graph, 10000);
    CHECK(std::abs(cf.s2) <= 1e-9);

    CHECK_THROWS_AS(rank_clt_scaling(K("gaussian"), 1, graph, 100), ConfigError);
}

TEST_CASE("qmc constants are self-consistent across node counts") {
    CounterRng rng(67);
    const auto x = testlib::random_matrix(60, 1, rng);
    const auto grid = lattice1d(60);
    const auto graph = build_knn(apply_ranks(grid, solve_assignment(x, grid)), 1);
    const auto c5 = rank_clt_scaling(K("gaussian"), 1, graph, 100000);
    const auto c6 = rank_clt_scaling(K("gaussian"), 1, graph, 1000000);
    CHECK(std::abs(c5.a_hat - c6.a_hat) <= 1e-4);
    CHECK(std::abs(c5.b_hat - c6.b_hat) <= 1e-4);
    CHECK(std::abs(c5.c_hat - c6.c_hat) <= 1e-4);
}

TEST_CASE("rank correlation along the x-order") {
    DataMatrix x(4, 1), y(4, 1);
    for (int i = 0; i < 4; ++i) {
        x.at(i, 0) = i;
        y.at(i, 0) = 2.0 * i + 1.0;  // increasing in x
    }
    CHECK(chatterjee_xi(x, y) == doctest::Approx(0.4));

    DataMatrix yr(4, 1);
    for (int i = 0; i < 4; ++i) yr.at(i, 0) = -2.0 * i;  // decreasing: same rank gaps
    CHECK(chatterjee_xi(x, yr) == doctest::Approx(0.4));

    CounterRng rng(71);
    DataMatrix xs = testlib::random_matrix(2000, 1, rng);
    DataMatrix ys = testlib::random_matrix(2000, 1, rng);
    CHECK(std::abs(chatterjee_xi(xs, ys)) <= 0.08);

    CHECK_THROWS_AS(chatterjee_xi(testlib::random_matrix(1, 1, rng), ys), ConfigError);
}
