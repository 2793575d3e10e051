#include "kmac/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "kmac/simd.hpp"

namespace kmac {

namespace {

double pow_alpha(double x, double alpha) {
    if (alpha == 1.0) return x;
    if (alpha == 2.0) return x * x;
    return std::pow(x, alpha);
}

void check_mincdf_value(double v) {
    if (v < 0.0 || v > 1.0)
        throw ConfigError("mincdf kernel requires inputs in [0,1], got " + std::to_string(v));
}

}  // namespace

void KernelSpec::validate() const {
    switch (family) {
        case KernelFamily::Gaussian:
        case KernelFamily::Laplacian:
            if (!median_bandwidth && !(sigma > 0.0))
                throw ConfigError("kernel bandwidth must be positive");
            break;
        case KernelFamily::Distance:
            if (!(alpha > 0.0) || alpha > 2.0)
                throw ConfigError("distance kernel requires 0 < alpha <= 2");
            break;
        case KernelFamily::Linear:
        case KernelFamily::MinCdf:
            break;
    }
}

bool KernelSpec::is_characteristic() const {
    switch (family) {
        case KernelFamily::Gaussian:
        case KernelFamily::Laplacian:
        case KernelFamily::MinCdf:
            return true;
        case KernelFamily::Distance:
            return alpha < 2.0;
        case KernelFamily::Linear:
            return false;
    }
    return false;
}

std::string KernelSpec::to_string() const {
    switch (family) {
        case KernelFamily::Gaussian:
            return median_bandwidth ? "gaussian:sigma=median"
                                    : "gaussian:sigma=" + std::to_string(sigma);
        case KernelFamily::Laplacian:
            return median_bandwidth ? "laplace:sigma=median"
                                    : "laplace:sigma=" + std::to_string(sigma);
        case KernelFamily::Distance:
            return "distance:alpha=" + std::to_string(alpha);
        case KernelFamily::Linear:
            return "linear";
        case KernelFamily::MinCdf:
            return "mincdf";
    }
    return "?";
}

KernelSpec parse_kernel_spec(const std::string& s) {
    KernelSpec spec;
    std::string head = s, args;
    if (const auto pos = s.find(':'); pos != std::string::npos) {
        head = s.substr(0, pos);
        args = s.substr(pos + 1);
    }
    if (head == "gaussian")
        spec.family = KernelFamily::Gaussian;
    else if (head == "laplace" || head == "laplacian")
        spec.family = KernelFamily::Laplacian;
    else if (head == "distance")
        spec.family = KernelFamily::Distance;
    else if (head == "linear")
        spec.family = KernelFamily::Linear;
    else if (head == "mincdf")
        spec.family = KernelFamily::MinCdf;
    else
        throw ConfigError("unknown kernel family: " + head);

    std::size_t start = 0;
    while (start < args.size()) {
        auto end = args.find(',', start);
        if (end == std::string::npos) end = args.size();
        const std::string kv = args.substr(start, end - start);
        start = end + 1;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("bad kernel option: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            if (key == "sigma") {
                if (val == "median")
                    spec.median_bandwidth = true;
                else
                    spec.sigma = std::stod(val);
            } else if (key == "alpha") {
                spec.alpha = std::stod(val);
            } else {
                throw ConfigError("unknown kernel option: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad kernel option value: " + kv);
        }
    }
    spec.validate();
    return spec;
}

double median_heuristic_bandwidth(const KernelSpec& spec, const DataMatrix& y) {
    const std::size_t n = y.rows();
    if (n < 2) throw ConfigError("median bandwidth needs at least 2 rows");
    const std::size_t m = std::min<std::size_t>(n, 1024);
    const std::size_t stride = n / m;
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i * stride;
    const bool l1 = spec.family == KernelFamily::Laplacian;
    std::vector<double> dists;
    dists.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            const double* pa = y.row(idx[a]);
            const double* pb = y.row(idx[b]);
            dists.push_back(l1 ? l1_dist(pa, pb, y.cols())
                               : std::sqrt(sq_dist(pa, pb, y.cols())));
        }
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    double med = dists[mid];
    if (!(med > 0.0)) throw DegenerateDataError("median pairwise distance is zero");
    return med;
}

KernelSpec resolve_bandwidth(const KernelSpec& spec, const DataMatrix& y) {
    if (!spec.median_bandwidth) return spec;
    KernelSpec out = spec;
    out.sigma = median_heuristic_bandwidth(spec, y);
    out.median_bandwidth = false;
    return out;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> y1,
                   std::span<const double> y2) {
    if (y1.size() != y2.size()) throw ConfigError("kernel_eval: dimension mismatch");
    spec.validate();
    if (spec.median_bandwidth)
        throw ConfigError("kernel_eval: unresolved median bandwidth");
    const std::size_t d = y1.size();
    switch (spec.family) {
        case KernelFamily::Gaussian:
            return std::exp(-sq_dist(y1.data(), y2.data(), d) *
                            (1.0 / (spec.sigma * spec.sigma)));
        case KernelFamily::Laplacian:
            return std::exp(-l1_dist(y1.data(), y2.data(), d) * (1.0 / spec.sigma));
        case KernelFamily::Distance: {
            const double na = pow_alpha(l2_norm(y1.data(), d), spec.alpha);
            const double nb = pow_alpha(l2_norm(y2.data(), d), spec.alpha);
            const double nd =
                pow_alpha(std::sqrt(sq_dist(y1.data(), y2.data(), d)), spec.alpha);
            return 0.5 * (na + nb - nd);
        }
        case KernelFamily::Linear:
            return dot(y1.data(), y2.data(), d);
        case KernelFamily::MinCdf: {
            if (d != 1) throw ConfigError("mincdf kernel is defined only for d=1");
            check_mincdf_value(y1[0]);
            check_mincdf_value(y2[0]);
            return std::min(y1[0], y2[0]);
        }
    }
    throw ConfigError("unreachable kernel family");
}

double kernel_self(const KernelSpec& spec, const double* y, std::size_t d) {
    switch (spec.family) {
        case KernelFamily::Gaussian:
        case KernelFamily::Laplacian:
            return 1.0;
        case KernelFamily::Distance:
            return pow_alpha(l2_norm(y, d), spec.alpha);
        case KernelFamily::Linear:
            return dot(y, y, d);
        case KernelFamily::MinCdf:
            if (d != 1) throw ConfigError("mincdf kernel is defined only for d=1");
            check_mincdf_value(y[0]);
            return y[0];
    }
    throw ConfigError("unreachable kernel family");
}

std::vector<double> kernel_self_diag(const KernelSpec& spec, const DataMatrix& y) {
    if (y.empty()) throw ConfigError("kernel_self_diag: empty data");
    spec.validate();
    std::vector<double> out(y.rows());
    for (std::size_t i = 0; i < y.rows(); ++i)
        out[i] = kernel_self(spec, y.row(i), y.cols());
    return out;
}

std::optional<double> kernel_sup(const KernelSpec& spec) {
    switch (spec.family) {
        case KernelFamily::Gaussian:
        case KernelFamily::Laplacian:
        case KernelFamily::MinCdf:
            return 1.0;
        default:
            return std::nullopt;
    }
}

KernelRowEval::KernelRowEval(const KernelSpec& spec, const DataMatrix& y)
    : spec_(spec), y_(y), cols_(y), n_(y.rows()) {
    spec_.validate();
    if (spec_.median_bandwidth)
        throw ConfigError("KernelRowEval: unresolved median bandwidth");
    if (spec_.family == KernelFamily::MinCdf) {
        if (y.cols() != 1) throw ConfigError("mincdf kernel is defined only for d=1");
        for (double v : y.data()) check_mincdf_value(v);
    }
    if (spec_.family == KernelFamily::Distance) {
        norms_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            norms_[i] = pow_alpha(l2_norm(y.row(i), y.cols()), spec_.alpha);
    }
}

void KernelRowEval::fill(std::size_t q_index, std::size_t j0, std::size_t j1,
                         double* out) const {
    const std::size_t d = y_.cols();
    const std::size_t m = j1 - j0;
    if (m == 0) return;
    const double* q = y_.row(q_index);
    std::vector<const double*> colp(d);
    for (std::size_t k = 0; k < d; ++k) colp[k] = cols_.col(k) + j0;
    switch (spec_.family) {
        case KernelFamily::Gaussian: {
            simd::sqdist_row(colp.data(), d, m, q, out);
            const double inv = 1.0 / (spec_.sigma * spec_.sigma);
            for (std::size_t j = 0; j < m; ++j) out[j] = std::exp(-out[j] * inv);
            break;
        }
        case KernelFamily::Laplacian: {
            simd::l1dist_row(colp.data(), d, m, q, out);
            const double inv = 1.0 / spec_.sigma;
            for (std::size_t j = 0; j < m; ++j) out[j] = std::exp(-out[j] * inv);
            break;
        }
        case KernelFamily::Distance: {
            simd::sqdist_row(colp.data(), d, m, q, out);
            simd::sqrt_inplace(out, m);
            const double nq = norms_[q_index];
            if (spec_.alpha == 1.0) {
                for (std::size_t j = 0; j < m; ++j)
                    out[j] = 0.5 * (nq + norms_[j0 + j] - out[j]);
            } else {
                for (std::size_t j = 0; j < m; ++j)
                    out[j] = 0.5 * (nq + norms_[j0 + j] - pow_alpha(out[j], spec_.alpha));
            }
            break;
        }
        case KernelFamily::Linear:
            simd::dot_row(colp.data(), d, m, q, out);
            break;
        case KernelFamily::MinCdf: {
            const double v = q[0];
            const double* col = cols_.col(0) + j0;
            for (std::size_t j = 0; j < m; ++j) out[j] = std::min(v, col[j]);
            break;
        }
    }
}

}  // namespace kmac
