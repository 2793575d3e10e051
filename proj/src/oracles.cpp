#include "kmac/oracles.hpp"

#include <cmath>
#include <numbers>

#include "kmac/simd.hpp"

namespace kmac {

double t1_gaussian(double rho) {
    if (std::abs(rho) > 1.0) throw ConfigError("t1_gaussian: |rho| must be <= 1");
    return 1.0 - std::sqrt(1.0 - rho * rho);
}

double t2_gaussian(double rho) {
    if (std::abs(rho) > 1.0) throw ConfigError("t2_gaussian: |rho| must be <= 1");
    return rho * rho;
}

void GaussianPairSpec::validate() const {
    if (std::abs(rho) > 1.0) throw ConfigError("gaussian pair: |rho| must be <= 1");
    if (!(sd_x > 0.0) || !(sd_y > 0.0)) throw ConfigError("gaussian pair: sds must be > 0");
    if (blocks < 1) throw ConfigError("gaussian pair: blocks must be >= 1");
}

std::pair<DataMatrix, DataMatrix> sample_gaussian_pair(const GaussianPairSpec& spec,
                                                       std::size_t n, std::uint64_t seed) {
    spec.validate();
    DataMatrix x(n, spec.blocks), y(n, spec.blocks);
    CounterRng rng = CounterRng::derive(seed, 0x6a55);
    const double tail = std::sqrt(1.0 - spec.rho * spec.rho);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b = 0; b < spec.blocks; ++b) {
            const double z1 = rng.next_normal();
            const double z2 = rng.next_normal();
            x.at(i, b) = spec.mean_x + spec.sd_x * z1;
            y.at(i, b) = spec.mean_y + spec.sd_y * (spec.rho * z1 + tail * z2);
        }
    return {std::move(x), std::move(y)};
}

Setting parse_setting(const std::string& s) {
    if (s == "linear") return Setting::Linear;
    if (s == "sinusoidal") return Setting::Sinusoidal;
    if (s == "wshaped") return Setting::Wshaped;
    if (s == "step") return Setting::Step;
    if (s == "semicircular") return Setting::Semicircular;
    if (s == "heterogeneous") return Setting::Heterogeneous;
    if (s == "null1") return Setting::NullSettingI;
    if (s == "null2") return Setting::NullSettingII;
    throw ConfigError("unknown setting: " + s);
}

std::string setting_name(Setting s) {
    switch (s) {
        case Setting::Linear: return "linear";
        case Setting::Sinusoidal: return "sinusoidal";
        case Setting::Wshaped: return "wshaped";
        case Setting::Step: return "step";
        case Setting::Semicircular: return "semicircular";
        case Setting::Heterogeneous: return "heterogeneous";
        case Setting::NullSettingI: return "null1";
        case Setting::NullSettingII: return "null2";
    }
    return "?";
}

void SettingSpec::validate() const {
    if (n < 1) throw ConfigError("setting: n must be positive");
    if (lambda < 0.0) throw ConfigError("setting: lambda must be >= 0");
    if (blocks < 1) throw ConfigError("setting: blocks must be >= 1");
}

namespace {

double step_fn(double x) {
    if (x < -0.05) return -3.0;
    if (x < 0.0) return 2.0;
    if (x < 0.05) return 4.0;
    return 3.0;
}

double pair_draw(Setting s, double lambda, CounterRng& rng, double* x_out) {
    switch (s) {
        case Setting::Linear: {
            const double x = rng.uniform(-1.0, 1.0);
            *x_out = x;
            return 0.5 * x + 3.0 * lambda * rng.next_normal();
        }
        case Setting::Sinusoidal: {
            const double x = rng.uniform(-1.0, 1.0);
            *x_out = x;
            return std::cos(8.0 * std::numbers::pi * x) + 3.0 * lambda * rng.next_normal();
        }
        case Setting::Wshaped: {
            const double x = rng.uniform(-1.0, 1.0);
            *x_out = x;
            const double core = x <= 0.0 ? std::abs(x + 0.5) : std::abs(x - 0.5);
            return core + 0.75 * lambda * rng.next_normal();
        }
        case Setting::Step: {
            const double x = rng.uniform(-1.0, 1.0);
            *x_out = x;
            return step_fn(x) + 10.0 * lambda * rng.next_normal();
        }
        case Setting::Semicircular: {
            const double x = rng.next_double();  // U(0,1) here
            *x_out = x;
            const double z = rng.next_u64() & 1 ? 1.0 : -1.0;
            return z * std::sqrt(1.0 - x * x) + 0.9 * lambda * rng.next_normal();
        }
        case Setting::Heterogeneous: {
            const double x = rng.uniform(-1.0, 1.0);
            *x_out = x;
            const double s = std::abs(x) <= 0.5 ? 1.0 : 0.0;
            return 3.0 * (s * (1.0 - lambda) + lambda) * rng.next_normal();
        }
        default:
            throw ConfigError("pair_draw: not a pairwise setting");
    }
}

}  // namespace

std::pair<DataMatrix, DataMatrix> sample_setting(const SettingSpec& spec) {
    spec.validate();
    CounterRng rng = CounterRng::derive(spec.seed, 0x5e77 + static_cast<int>(spec.name));
    const std::size_t n = spec.n;

    if (spec.name == Setting::NullSettingI || spec.name == Setting::NullSettingII) {
        const bool dup = spec.name == Setting::NullSettingI;
        DataMatrix x(n, dup ? 5 : 4), y(n, 4);
        for (std::size_t i = 0; i < n; ++i) {
            double t[4];
            for (double& v : t) v = rng.next_double();
            for (std::size_t c = 0; c < 4; ++c) x.at(i, c) = t[c];
            if (dup) x.at(i, 4) = t[0] + t[1];
            for (std::size_t c = 0; c < 4; ++c) y.at(i, c) = rng.next_exponential();
        }
        return {std::move(x), std::move(y)};
    }

    DataMatrix x(n, spec.blocks), y(n, spec.blocks);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b = 0; b < spec.blocks; ++b) {
            double xv = 0.0;
            y.at(i, b) = pair_draw(spec.name, spec.lambda, rng, &xv);
            x.at(i, b) = xv;
        }
    return {std::move(x), std::move(y)};
}

ConditionalModel gaussian_pair_model(const GaussianPairSpec& spec) {
    spec.validate();
    ConditionalModel m;
    m.dy = spec.blocks;
    m.sample_x = [spec](CounterRng& rng) {
        std::vector<double> x(spec.blocks);
        for (double& v : x) v = spec.mean_x + spec.sd_x * rng.next_normal();
        return x;
    };
    m.sample_y_given_x = [spec](CounterRng& rng, const std::vector<double>& x) {
        const double tail = spec.sd_y * std::sqrt(1.0 - spec.rho * spec.rho);
        std::vector<double> y(spec.blocks);
        for (std::size_t b = 0; b < spec.blocks; ++b) {
            const double zx = (x[b] - spec.mean_x) / spec.sd_x;
            y[b] = spec.mean_y + spec.sd_y * spec.rho * zx + tail * rng.next_normal();
        }
        return y;
    };
    return m;
}

ConditionalModel independent_gaussian_model(std::size_t dx, std::size_t dy) {
    ConditionalModel m;
    m.dy = dy;
    m.sample_x = [dx](CounterRng& rng) {
        std::vector<double> x(dx);
        for (double& v : x) v = rng.next_normal();
        return x;
    };
    m.sample_y_given_x = [dy](CounterRng& rng, const std::vector<double>&) {
        std::vector<double> y(dy);
        for (double& v : y) v = rng.next_normal();
        return y;
    };
    return m;
}

ConditionalModel noiseless_identity_model(std::size_t d) {
    ConditionalModel m;
    m.dy = d;
    m.sample_x = [d](CounterRng& rng) {
        std::vector<double> x(d);
        for (double& v : x) v = rng.next_double();
        return x;
    };
    m.sample_y_given_x = [](CounterRng&, const std::vector<double>& x) { return x; };
    return m;
}

bool EtaMcResult::forms_agree() const {
    const double se = std::sqrt(direct_se * direct_se + mmd_se * mmd_se);
    return std::abs(direct - mmd) <= 3.0 * se;
}

namespace {

// Ratio mean(num)/mean(den) with a delta-method standard error.
struct RatioAcc {
    std::vector<double> num, den;

    void push(double n, double d) {
        num.push_back(n);
        den.push_back(d);
    }

    void finish(double* value, double* se) const {
        const std::size_t r = num.size();
        const double N = simd::det_sum(num.data(), r) / r;
        const double D = simd::det_sum(den.data(), r) / r;
        double vn = 0.0, vd = 0.0, cnd = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            vn += (num[i] - N) * (num[i] - N);
            vd += (den[i] - D) * (den[i] - D);
            cnd += (num[i] - N) * (den[i] - D);
        }
        vn /= (r - 1.0);
        vd /= (r - 1.0);
        cnd /= (r - 1.0);
        *value = N / D;
        const double var = (vn / (D * D) + N * N * vd / (D * D * D * D) -
                            2.0 * N * cnd / (D * D * D)) /
                           static_cast<double>(r);
        *se = std::sqrt(std::max(var, 0.0));
    }
};

double kev(const KernelSpec& ks, const std::vector<double>& a, const std::vector<double>& b) {
    return kernel_eval(ks, std::span<const double>(a), std::span<const double>(b));
}

}  // namespace

EtaMcResult eta_population_mc(const ConditionalModel& model, const KernelSpec& kernel,
                              std::size_t reps, std::uint64_t seed,
                              bool allow_small_reps) {
    if (reps < 10000 && !allow_small_reps)
        throw ConfigError("eta_population_mc: reps < 10000 (pass override to force)");
    kernel.validate();
    if (kernel.median_bandwidth)
        throw ConfigError("eta_population_mc: unresolved median bandwidth");

    RatioAcc direct, mmd;
    CounterRng rng_a = CounterRng::derive(seed, 0xd1);
    CounterRng rng_b = CounterRng::derive(seed, 0xd2);

    for (std::size_t r = 0; r < reps; ++r) {
        {  // direct conditional form
            const auto xc = model.sample_x(rng_a);
            const auto yc1 = model.sample_y_given_x(rng_a, xc);
            const auto yc2 = model.sample_y_given_x(rng_a, xc);
            const auto ya = model.sample_y_given_x(rng_a, model.sample_x(rng_a));
            const auto yb = model.sample_y_given_x(rng_a, model.sample_x(rng_a));
            const auto ys = model.sample_y_given_x(rng_a, model.sample_x(rng_a));
            const double kc = kev(kernel, yc1, yc2);
            const double kx = kev(kernel, ya, yb);
            const double ks = kev(kernel, ys, ys);
            direct.push(kc - kx, ks - kx);
        }
        {  // averaged squared-discrepancy form
            const auto xc = model.sample_x(rng_b);
            const auto s1 = model.sample_y_given_x(rng_b, xc);
            const auto s2 = model.sample_y_given_x(rng_b, xc);
            const auto w1 = model.sample_y_given_x(rng_b, model.sample_x(rng_b));
            const auto w2 = model.sample_y_given_x(rng_b, model.sample_x(rng_b));
            const auto ys = model.sample_y_given_x(rng_b, model.sample_x(rng_b));
            const auto ya = model.sample_y_given_x(rng_b, model.sample_x(rng_b));
            const auto yb = model.sample_y_given_x(rng_b, model.sample_x(rng_b));
            const double num =
                kev(kernel, s1, s2) + kev(kernel, w1, w2) - 2.0 * kev(kernel, s1, w1);
            const double den = kev(kernel, ys, ys) - kev(kernel, ya, yb);
            mmd.push(num, den);
        }
    }

    EtaMcResult out;
    direct.finish(&out.direct, &out.direct_se);
    mmd.finish(&out.mmd, &out.mmd_se);
    return out;
}

}  // namespace kmac
