#include "kmac/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kmac/simd.hpp"

namespace kmac {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_upper_p(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    // Acklam coefficients
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // one Halley step against the exact CDF
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

double kolmogorov_q(double t) {
    if (t <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_distance_normal(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const std::size_t m = sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double f = normal_cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / m));
        d = std::max(d, std::abs(f - static_cast<double>(i) / m));
    }
    return d;
}

double ks_distance_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const std::size_t m = sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double f = std::clamp(sample[i], 0.0, 1.0);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / m));
        d = std::max(d, std::abs(f - static_cast<double>(i) / m));
    }
    return d;
}

double ks_pvalue(double d, std::size_t m) {
    const double sm = std::sqrt(static_cast<double>(m));
    return kolmogorov_q((sm + 0.12 + 0.11 / sm) * d);
}

KsTwoSample ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n1 = a.size(), n2 = b.size();
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < n1 && j < n2) {
        const double v = std::min(a[i], b[j]);
        while (i < n1 && a[i] <= v) ++i;
        while (j < n2 && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    KsTwoSample out;
    out.distance = d;
    const double ne = static_cast<double>(n1) * n2 / static_cast<double>(n1 + n2);
    const double se = std::sqrt(ne);
    out.p_value = kolmogorov_q((se + 0.12 + 0.11 / se) * d);
    return out;
}

SlopeFit ols_slope(const std::vector<double>& x, const std::vector<double>& y,
                   double point_sigma) {
    const std::size_t m = x.size();
    if (m < 2 || y.size() != m) throw std::invalid_argument("ols_slope: bad input");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double se = point_sigma / std::sqrt(sxx);
    fit.ci_lo = fit.slope - 1.959963984540054 * se;
    fit.ci_hi = fit.slope + 1.959963984540054 * se;
    return fit;
}

double mean(const std::vector<double>& v) {
    return simd::det_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return simd::det_sum(sq.data(), sq.size()) / static_cast<double>(v.size() - 1);
}

}  // namespace kmac
