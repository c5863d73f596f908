#include "mcstop/core.hpp"

#include <cmath>
#include <stdexcept>

namespace mcstop {

ParameterSpec ParameterSpec::mean(std::string id, std::size_t component) {
    ParameterSpec spec;
    spec.id = std::move(id);
    spec.kind = ParameterKind::Mean;
    spec.component = component;
    return spec;
}

ParameterSpec ParameterSpec::quantile(std::string id, double q, std::size_t component) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("quantile level must lie strictly inside (0, 1)");
    }
    ParameterSpec spec;
    spec.id = std::move(id);
    spec.kind = ParameterKind::Quantile;
    spec.q = q;
    spec.component = component;
    return spec;
}

TracePool::TracePool(std::size_t series_count) : series_(series_count) {}

void TracePool::append(std::span<const double> values) {
    if (values.size() != series_.size()) {
        throw std::invalid_argument("TracePool::append: one value per series required");
    }
    for (std::size_t k = 0; k < series_.size(); ++k) {
        series_[k].push_back(values[k]);
    }
    ++length_;
}

void TracePool::reserve(std::size_t n) {
    for (auto& s : series_) {
        s.reserve(n);
    }
}

std::span<const double> TracePool::series(std::size_t k) const {
    return {series_.at(k).data(), series_.at(k).size()};
}

// Wichura (1988), "Algorithm AS 241: The Percentage Points of the Normal
// Distribution", Applied Statistics 37(3).  Relative error below 1e-15 over
// the full open interval; the central branch covers |p - 0.5| <= 0.425.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie strictly inside (0, 1)");
    }

    static constexpr double a[8] = {
        3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
        1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
        3.3430575583588128105e4,  2.5090809287301226727e3};
    static constexpr double b[8] = {
        1.0,                      4.2313330701600911252e1, 6.8718700749205790830e2,
        5.3941960214247511077e3,  2.1213794301586595867e4, 3.9307895800092710610e4,
        2.8729085735721942674e4,  5.2264952788528545610e3};
    static constexpr double c[8] = {
        1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
        3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
        2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {
        1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
        6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
        5.47593808499534494600e-4, 1.05075007164441684324e-9};
    static constexpr double e[8] = {
        6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
        2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
        2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {
        1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
        1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
        1.42151175831644588870e-7, 2.04426310338993978564e-15};

    auto ratio = [](const double (&num)[8], const double (&den)[8], double r) {
        double n = num[7];
        double m = den[7];
        for (int i = 6; i >= 0; --i) {
            n = n * r + num[i];
            m = m * r + den[i];
        }
        return n / m;
    };

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * ratio(a, b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        value = ratio(c, d, r - 1.6);
    } else {
        value = ratio(e, f, r - 5.0);
    }
    return q < 0.0 ? -value : value;
}

double halfwidth(double sigma_hat, std::uint64_t n, double delta) {
    if (n == 0) {
        throw std::domain_error("halfwidth: n must be at least 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::domain_error("halfwidth: delta must lie strictly inside (0, 1)");
    }
    const double z = normal_quantile(1.0 - delta / 2.0);
    return z * sigma_hat / std::sqrt(static_cast<double>(n));
}

IntervalEstimate make_interval_estimate(std::uint64_t n, double point, double sigma_hat,
                                        double lambda_hat, double delta) {
    IntervalEstimate est;
    est.n = n;
    est.point = point;
    est.sigma_hat = sigma_hat;
    est.lambda_hat = lambda_hat;
    est.half_width = halfwidth(sigma_hat, n, delta);
    est.delta = delta;
    return est;
}

bool interval_contains(const IntervalEstimate& est, double truth) {
    return std::fabs(est.point - truth) < est.half_width;
}

}  // namespace mcstop
