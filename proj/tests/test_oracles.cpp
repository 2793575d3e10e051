#include "doctest.h"

#include <cmath>
#include <numbers>

#include "kmac/oracles.hpp"
#include "testlib.hpp"

using namespace kmac;

TEST_CASE("gaussian closed forms") {
    CHECK(t1_gaussian(0.0) == 0.0);
    CHECK(t1_gaussian(0.6) == doctest::Approx(0.2));
    CHECK(t1_gaussian(1.0) == doctest::Approx(1.0));
    CHECK(t2_gaussian(0.0) == 0.0);
    CHECK(t2_gaussian(0.5) == doctest::Approx(0.25));
    CHECK(t2_gaussian(-1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(t1_gaussian(1.5), ConfigError);

    // sqrt(T1) <= |rho| with ratio at least 1/sqrt(2) away from zero
    for (int i = 0; i <= 100; ++i) {
        const double rho = -1.0 + 0.02 * i;
        const double t1 = t1_gaussian(rho);
        CHECK(std::sqrt(t1) <= std::abs(rho) + 1e-15);
        if (rho != 0.0)
            CHECK(std::sqrt(t1) / std::abs(rho) >= std::sqrt(0.5) - 1e-12);
    }
}

TEST_CASE("setting samplers honor their formulas") {
    {
        SettingSpec sp;
        sp.name = Setting::Sinusoidal;
        sp.lambda = 0.0;
        sp.n = 200;
        sp.seed = 1;
        auto [x, y] = sample_setting(sp);
        CHECK(x.cols() == 2);
        CHECK(y.cols() == 2);
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t b = 0; b < 2; ++b)
                CHECK(y.at(i, b) ==
                      doctest::Approx(std::cos(8.0 * std::numbers::pi * x.at(i, b)))
                          .epsilon(1e-12));
    }
    {
        SettingSpec sp;
        sp.name = Setting::NullSettingI;
        sp.n = 100;
        sp.seed = 2;
        auto [x, y] = sample_setting(sp);
        CHECK(x.cols() == 5);
        CHECK(y.cols() == 4);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            CHECK(x.at(i, 4) == x.at(i, 0) + x.at(i, 1));  // duplicated coordinate
            for (std::size_t c = 0; c < 4; ++c) CHECK(y.at(i, c) >= 0.0);
        }
    }
    {
        SettingSpec sp;
        sp.name = Setting::Step;
        sp.lambda = 0.0;
        sp.n = 400;
        sp.seed = 3;
        auto [x, y] = sample_setting(sp);
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t b = 0; b < 2; ++b) {
                const double xv = x.at(i, b);
                const double expect = xv < -0.05 ? -3.0 : xv < 0.0 ? 2.0 : xv < 0.05 ? 4.0 : 3.0;
                CHECK(y.at(i, b) == expect);
            }
    }
    {
        SettingSpec sp;
        sp.name = Setting::Semicircular;
        sp.lambda = 0.0;
        sp.n = 300;
        sp.seed = 4;
        auto [x, y] = sample_setting(sp);
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t b = 0; b < 2; ++b) {
                CHECK(x.at(i, b) >= 0.0);
                CHECK(x.at(i, b) <= 1.0);
                CHECK(std::abs(y.at(i, b)) ==
                      doctest::Approx(std::sqrt(1.0 - x.at(i, b) * x.at(i, b))).epsilon(1e-12));
            }
    }
    {
        SettingSpec sp;
        sp.name = Setting::Heterogeneous;
        sp.lambda = 0.0;
        sp.n = 300;
        sp.seed = 5;
        auto [x, y] = sample_setting(sp);
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t b = 0; b < 2; ++b)
                if (std::abs(x.at(i, b)) > 0.5) CHECK(y.at(i, b) == 0.0);
    }
    {
        SettingSpec sp;
        sp.name = Setting::Wshaped;
        sp.lambda = 0.0;
        sp.n = 300;
        sp.seed = 6;
        auto [x, y] = sample_setting(sp);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double xv = x.at(i, 0);
            const double expect = xv <= 0.0 ? std::abs(xv + 0.5) : std::abs(xv - 0.5);
            CHECK(y.at(i, 0) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    {
        SettingSpec sp;
        sp.name = Setting::Linear;
        sp.lambda = 0.0;
        sp.n = 100;
        sp.seed = 7;
        sp.blocks = 1;
        auto [x, y] = sample_setting(sp);
        CHECK(x.cols() == 1);
        for (std::size_t i = 0; i < x.rows(); ++i)
            CHECK(y.at(i, 0) == doctest::Approx(0.5 * x.at(i, 0)).epsilon(1e-12));
    }
}

TEST_CASE("samplers are seed-deterministic") {
    SettingSpec sp;
    sp.name = Setting::Sinusoidal;
    sp.lambda = 0.3;
    sp.n = 50;
    sp.seed = 99;
    auto [x1, y1] = sample_setting(sp);
    auto [x2, y2] = sample_setting(sp);
    CHECK(x1.data() == x2.data());
    CHECK(y1.data() == y2.data());

    GaussianPairSpec gp;
    gp.rho = 0.4;
    gp.blocks = 2;
    auto [a1, b1] = sample_gaussian_pair(gp, 50, 123);
    auto [a2, b2] = sample_gaussian_pair(gp, 50, 123);
    CHECK(a1.data() == a2.data());
    CHECK(b1.data() == b2.data());

    CHECK_THROWS_AS(([&] {
                        GaussianPairSpec bad;
                        bad.rho = 1.2;
                        bad.validate();
                    }()),
                    ConfigError);
}

TEST_CASE("population functional through both routes") {
    const KernelSpec kd = parse_kernel_spec("distance:alpha=1");
    const std::size_t reps = 60000;

    {
        const auto r = eta_population_mc(independent_gaussian_model(2, 2), kd, reps, 1);
        CHECK(std::abs(r.direct) <= 3.0 * r.direct_se + 1e-12);
        CHECK(std::abs(r.mmd) <= 3.0 * r.mmd_se + 1e-12);
        CHECK(r.forms_agree());
    }
    {
        const auto r = eta_population_mc(noiseless_identity_model(2), kd, reps, 2);
        CHECK(std::abs(r.direct - 1.0) <= 3.0 * r.direct_se + 1e-12);
        CHECK(r.forms_agree());
    }
    {
        GaussianPairSpec gp;
        gp.rho = 0.6;
        gp.blocks = 2;
        const auto r = eta_population_mc(gaussian_pair_model(gp), kd, reps, 3);
        CHECK(std::abs(r.direct - 0.2) <= 3.0 * r.direct_se);
        CHECK(std::abs(r.mmd - 0.2) <= 3.0 * r.mmd_se);
        CHECK(r.forms_agree());
    }
    CHECK_THROWS_AS(eta_population_mc(independent_gaussian_model(1, 1), kd, 100, 1),
                    ConfigError);
}
