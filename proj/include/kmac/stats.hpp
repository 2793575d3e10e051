#pragma once

#include <cstddef>
#include <vector>

namespace kmac {

// Standard normal CDF via erfc; absolute error well under 1e-14.
double normal_cdf(double z);
// Upper tail 1 - Phi(z).
double normal_upper_p(double z);
// Inverse CDF (Acklam's rational approximation + one Halley refinement).
double normal_quantile(double p);

// Kolmogorov limit distribution Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_q(double t);

// One-sample KS distance of a sample against the standard normal.
double ks_distance_normal(std::vector<double> sample);
// Asymptotic one-sample KS p-value for distance d at sample size m.
double ks_pvalue(double d, std::size_t m);

struct KsTwoSample {
    double distance = 0.0;
    double p_value = 1.0;
};
KsTwoSample ks_two_sample(std::vector<double> a, std::vector<double> b);

// KS distance of a sample against U[0,1].
double ks_distance_uniform(std::vector<double> sample);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

// OLS slope of y on x with one common known per-point standard error;
// the 95% interval propagates that error through the normal equations.
SlopeFit ols_slope(const std::vector<double>& x, const std::vector<double>& y,
                   double point_sigma);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased

}  // namespace kmac
