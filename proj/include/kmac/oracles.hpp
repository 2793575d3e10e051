#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kmac/common.hpp"
#include "kmac/kernels.hpp"
#include "kmac/rng.hpp"

namespace kmac {

// Closed-form population values for the bivariate Gaussian family.
double t1_gaussian(double rho);  // 1 - sqrt(1 - rho^2)
double t2_gaussian(double rho);  // rho^2

// Bivariate Gaussian pair, optionally stacked: `blocks` independent
// (X^(k), Y^(k)) pairs form the coordinates of X and Y.
struct GaussianPairSpec {
    double rho = 0.0;
    double mean_x = 0.0, mean_y = 0.0;
    double sd_x = 1.0, sd_y = 1.0;
    std::size_t blocks = 1;

    void validate() const;
};

std::pair<DataMatrix, DataMatrix> sample_gaussian_pair(const GaussianPairSpec& spec,
                                                       std::size_t n, std::uint64_t seed);

enum class Setting {
    Linear,
    Sinusoidal,
    Wshaped,
    Step,
    Semicircular,
    Heterogeneous,
    NullSettingI,
    NullSettingII,
};

Setting parse_setting(const std::string& s);
std::string setting_name(Setting s);

// Synthetic benchmark settings.  For the six dependence settings the pair
// (X^(1), Y^(1)) follows the listed law and `blocks` i.i.d. copies are
// stacked into the coordinates (default 2, giving d1 = d2 = 2):
//
//   linear         X ~ U[-1,1],  Y = 0.5 X + 3 lambda eps
//   sinusoidal     X ~ U[-1,1],  Y = cos(8 pi X) + 3 lambda eps
//   wshaped        X ~ U[-1,1],  Y = |X+.5| 1(X<=0) + |X-.5| 1(X>0) + .75 lambda eps
//   step           X ~ U[-1,1],  Y = f(X) + 10 lambda eps,
//                  f = -3,2,4,3 on [-1,-.05), [-.05,0), [0,.05), [.05,1]
//   semicircular   X ~ U(0,1),   Y = Z sqrt(1-X^2) + 0.9 lambda eps, Z = +-1
//   heterogeneous  X ~ U[-1,1],  Y = 3 (s(X)(1-lambda) + lambda) eps, s = 1(|X|<=.5)
//
// The two independence settings are fixed-shape: null1 has X = (T, T1+T2)
// with T ~ U[0,1]^4 (5 columns, not absolutely continuous) and null2 has
// X = T; in both, Y has 4 i.i.d. Exp(1) columns.
struct SettingSpec {
    Setting name = Setting::Sinusoidal;
    double lambda = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::size_t blocks = 2;

    void validate() const;
};

std::pair<DataMatrix, DataMatrix> sample_setting(const SettingSpec& spec);

// A sampling model exposing the marginal of X and the conditional of Y
// given X = x, which is all the population functional needs.
struct ConditionalModel {
    std::size_t dy = 1;
    std::function<std::vector<double>(CounterRng&)> sample_x;
    std::function<std::vector<double>(CounterRng&, const std::vector<double>&)>
        sample_y_given_x;
};

ConditionalModel gaussian_pair_model(const GaussianPairSpec& spec);
ConditionalModel independent_gaussian_model(std::size_t dx, std::size_t dy);
// Y = X with X uniform on [0,1]^d (noiseless dependence).
ConditionalModel noiseless_identity_model(std::size_t d);

// Monte Carlo estimate of the population association through two routes:
// the direct conditional form and the averaged-squared-discrepancy form.
// Both are unbiased for the same functional and must agree within
// 3 combined standard errors.
struct EtaMcResult {
    double direct = 0.0;
    double direct_se = 0.0;
    double mmd = 0.0;
    double mmd_se = 0.0;
    bool forms_agree() const;
};

EtaMcResult eta_population_mc(const ConditionalModel& model, const KernelSpec& kernel,
                              std::size_t reps, std::uint64_t seed,
                              bool allow_small_reps = false);

}  // namespace kmac
