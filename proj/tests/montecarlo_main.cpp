#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// Statistical behavior at moderate scale: consistency limits, test levels,
// permutation uniformity, variance calibration.  Slower than the unit
// suite; everything is seeded, so results are reproducible.

#include <cmath>
#include <vector>

#include "kmac/harness.hpp"
#include "kmac/parallel.hpp"
#include "kmac/rng.hpp"
#include "kmac/stats.hpp"
#include "testlib.hpp"

using namespace kmac;

namespace {
KernelSpec K(const std::string& s) { return parse_kernel_spec(s); }
}  // namespace

TEST_CASE("estimator limits at moderate sample sizes") {
    {
        // independent pair: both estimators near zero
        CounterRng rng(1);
        const auto x = testlib::random_matrix(2000, 2, rng);
        const auto y = testlib::random_matrix(2000, 2, rng);
        const auto g = build_knn(x, 1);
        CHECK(std::abs(eta_hat(x, y, K("gaussian"), g).value) <= 0.1);
        CHECK(std::abs(eta_hat_lin(x, y, K("gaussian"), g).value) <= 0.15);
    }
    {
        // noiseless monotone dependence on the rescaled integers
        const std::size_t n = 1000;
        DataMatrix x(n, 1), y(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            x.at(i, 0) = static_cast<double>(i + 1) / n;
            y.at(i, 0) = static_cast<double>(i + 1) / n;
        }
        const auto g = build_knn(x, 1);
        CHECK(eta_hat(x, y, K("mincdf"), g).value >= 0.9);
    }
    {
        // noiseless identity from uniform draws, distance-only route
        CounterRng rng(2);
        DataMatrix x(2000, 1);
        for (std::size_t i = 0; i < 2000; ++i) x.at(i, 0) = rng.next_double();
        const auto g = build_knn(x, 1);
        CHECK(t_n_energy(x, x, g).value >= 0.9);
    }
}

TEST_CASE("asymptotic level under independence") {
    const std::size_t reps = 500;
    std::vector<char> reject(reps, 0);
    parallel_for(reps, [&](std::size_t rep) {
        SettingSpec sp;
        sp.name = Setting::NullSettingII;
        sp.n = 2000;
        sp.seed = mix64(100 + rep);
        auto [x, y] = sample_setting(sp);
        const auto graph = build_knn(x, 1);
        const double num =
            numerator_stat(EstimatorKind::Linear, x, y, K("distance:alpha=1"), graph);
        const auto sc = clt_scaling_linear(y, K("distance:alpha=1"), graph);
        reject[rep] = num / std::sqrt(sc.s2) >= normal_quantile(0.95) ? 1 : 0;
    });
    std::size_t count = 0;
    for (char c : reject) count += c;
    const double rate = static_cast<double>(count) / reps;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("permutation p-values are uniform under independence") {
    const std::size_t reps = 200;
    std::vector<double> pvals(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        CounterRng rng(mix64(300 + rep));
        const auto x = testlib::random_matrix(100, 2, rng);
        const auto y = testlib::random_matrix(100, 2, rng);
        pvals[rep] = permutation_test(EstimatorKind::Standard, x, y, K("distance:alpha=1"),
                                      parse_graph_spec("knn:k=1"), 199, mix64(900 + rep))
                         .p_value;
    }
    const double d = ks_distance_uniform(pvals);
    CHECK(ks_pvalue(d, reps) > 0.01);
}

TEST_CASE("baseline tests keep their level under independence") {
    const std::size_t reps = 100;
    std::vector<double> p_dcov(reps), p_hsic(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        CounterRng rng(mix64(500 + rep));
        const auto x = testlib::random_matrix(80, 2, rng);
        const auto y = testlib::random_matrix(80, 2, rng);
        p_dcov[rep] = dcov_test(x, y, 99, mix64(600 + rep)).p_value;
        p_hsic[rep] = hsic_test(x, y, K("gaussian"), 99, mix64(700 + rep)).p_value;
    }
    CHECK(ks_pvalue(ks_distance_uniform(p_dcov), reps) > 0.01);
    CHECK(ks_pvalue(ks_distance_uniform(p_hsic), reps) > 0.01);

    // and reject under exact dependence
    CounterRng rng(42);
    DataMatrix x(300, 1);
    for (std::size_t i = 0; i < 300; ++i) x.at(i, 0) = rng.next_double();
    CHECK(dcov_test(x, x, 999, 3).p_value <= 0.01);
    CHECK(hsic_test(x, x, K("gaussian"), 999, 3).p_value <= 0.01);
    CHECK(permutation_test(EstimatorKind::Standard, x, x, K("distance:alpha=1"),
                           parse_graph_spec("knn:k=1"), 999, 3)
              .p_value <= 0.01);
}

TEST_CASE("cyclic variance estimate tracks the numerator variance") {
    const std::size_t reps = 500, n = 2000;
    std::vector<double> nums(reps), s2s(reps);
    parallel_for(reps, [&](std::size_t rep) {
        SettingSpec sp;
        sp.name = Setting::NullSettingII;
        sp.n = n;
        sp.seed = mix64(800 + rep);
        auto [x, y] = sample_setting(sp);
        const auto graph = build_knn(x, 1);
        nums[rep] = numerator_stat(EstimatorKind::Linear, x, y, K("distance:alpha=1"), graph);
        s2s[rep] = clt_scaling_linear(y, K("distance:alpha=1"), graph).s2;
    });
    const double var_emp = variance(nums);
    const double s2_mean = mean(s2s);
    CHECK(std::abs(s2_mean - var_emp) <= 0.15 * var_emp);
}

TEST_CASE("asymptotic and permutation decisions agree on extremes") {
    const std::size_t reps = 100;
    std::size_t agree = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        const bool dependent = rep % 2 == 0;
        CounterRng rng(mix64(1000 + rep));
        DataMatrix x = testlib::random_matrix(2000, 1, rng);
        DataMatrix y = dependent ? x : testlib::random_matrix(2000, 1, rng);
        const auto spec = parse_graph_spec("knn:k=1");
        const auto a =
            asymptotic_test(EstimatorKind::Linear, x, y, K("distance:alpha=1"), spec);
        const auto p = permutation_test(EstimatorKind::Linear, x, y, K("distance:alpha=1"),
                                        spec, 199, mix64(2000 + rep));
        const bool ra = a.p_value <= 0.05, rp = p.p_value <= 0.05;
        if (ra == rp) ++agree;
    }
    CHECK(agree >= 95);
}

TEST_CASE("rank statistic is standard normal under independence") {
    const std::size_t n = 500, reps = 200;
    for (const char* kspec : {"mincdf", "gaussian"}) {
        const KernelSpec ks = K(kspec);
        std::vector<double> z(reps);
        parallel_for(reps, [&](std::size_t rep) {
            CounterRng rng = CounterRng::derive(7, rep);
            DataMatrix x(n, 1), y(n, 1);
            for (std::size_t i = 0; i < n; ++i) {
                x.at(i, 0) = rng.next_normal();
                y.at(i, 0) = rng.next_cauchy();  // heavy tails are invisible to ranks
            }
            GeoGraph graph;
            const auto est = eta_hat_rank(x, y, ks, parse_graph_spec("knn:k=1"),
                                          lattice1d(n), lattice1d(n), &graph);
            const auto sc = rank_clt_scaling(ks, 1, graph, 50000);
            z[rep] = std::sqrt(double(n)) * est.numerator / std::sqrt(sc.s2);
        });
        const double d = ks_distance_normal(z);
        CHECK(ks_pvalue(d, reps) > 0.01);
        CHECK(std::abs(mean(z)) <= 0.2);
        CHECK(std::abs(variance(z) - 1.0) <= 0.35);
    }
}

TEST_CASE("rank estimator saturates under noiseless dependence") {
    CounterRng rng(4242);
    const std::size_t n = 5000;
    DataMatrix x(n, 1);
    for (std::size_t i = 0; i < n; ++i) x.at(i, 0) = rng.next_normal();
    const auto est = eta_hat_rank(x, x, K("mincdf"), parse_graph_spec("knn:k=1"),
                                  lattice1d(n), lattice1d(n));
    CHECK(est.value >= 0.95);
}

TEST_CASE("power collapses at the highest noise level") {
    // sinusoidal signal of unit amplitude under noise sd 3
    PowerCurveConfig cfg;
    cfg.setting = Setting::Sinusoidal;
    cfg.lambdas = {1.0};
    cfg.n = 300;
    cfg.B = 199;
    cfg.reps = 100;
    cfg.seed = 4343;
    cfg.tests = {{PowerTestSpec::Type::Kmac, EstimatorKind::Standard,
                  K("distance:alpha=1"), parse_graph_spec("knn:k=1"), "kmac_std_1nn"}};
    const auto t = run_power_curve(cfg);
    CHECK(t.rows[0][1] <= 0.15);
}

TEST_CASE("graph-average estimator approaches the closed form") {
    // distance-only route on the stacked correlated pair
    std::vector<double> vals(10);
    parallel_for(10, [&](std::size_t rep) {
        GaussianPairSpec gp;
        gp.rho = 0.6;
        gp.blocks = 2;
        auto [x, y] = sample_gaussian_pair(gp, 4000, mix64(4000 + rep));
        vals[rep] = t_n_energy(x, y, build_knn(x, 20)).value;
    });
    CHECK(std::abs(mean(vals) - 0.2) <= 0.05);
}

TEST_CASE("mean estimate responds monotonically to correlation strength") {
    const std::vector<double> rhos{0.0, 0.25, 0.5, 0.75, 0.95};
    std::vector<double> means;
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
        std::vector<double> vals(20);
        parallel_for(20, [&](std::size_t rep) {
            GaussianPairSpec gp;
            gp.rho = rhos[ri];
            gp.blocks = 2;
            auto [x, y] = sample_gaussian_pair(gp, 4000, mix64(3000 + 100 * ri + rep));
            const auto g = build_knn(x, 20);
            vals[rep] = eta_hat(x, y, K("distance:alpha=1"), g).value;
        });
        means.push_back(mean(vals));
    }
    for (std::size_t i = 1; i < means.size(); ++i) CHECK(means[i] >= means[i - 1] - 0.03);
}

TEST_CASE("coefficient curve shape on the noisy sinusoid") {
    CoeffCurveConfig cfg;
    cfg.setting = "sinusoidal";
    cfg.grid = {0.0, 2.5};
    cfg.n = 2000;
    cfg.reps = 3;
    cfg.seed = 17;
    cfg.configs = {{EstimatorKind::Standard, K("distance:alpha=1"), parse_graph_spec("knn:k=1"),
                    "eta_dist_1nn"}};
    const auto t = run_coeff_curve(cfg);
    const double at0 = t.rows[0][1], at25 = t.rows[1][1];
    CHECK(at0 - at25 >= 0.5);  // sharp decline as the noise grows

    // the one-dimensional noiseless curve starts essentially at 1
    SettingSpec sp;
    sp.name = Setting::Sinusoidal;
    sp.lambda = 0.0;
    sp.n = 2000;
    sp.seed = 18;
    sp.blocks = 1;
    auto [x1, y1] = sample_setting(sp);
    CHECK(eta_hat(x1, y1, K("distance:alpha=1"), build_knn(x1, 1)).value >= 0.85);

    // independence endpoint of the correlation curve
    CoeffCurveConfig lin;
    lin.setting = "linear";
    lin.grid = {0.0};
    lin.n = 2000;
    lin.reps = 3;
    lin.seed = 19;
    const auto tl = run_coeff_curve(lin);
    for (std::size_t c = 1; c < tl.columns.size(); ++c)
        CHECK(std::abs(tl.rows[0][c]) <= 0.05);
}
