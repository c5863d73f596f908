#include "mcstop/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mcstop/errors.hpp"

namespace mcstop {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// (j+1)-th order statistic via selection; identical to sorting and indexing.
double order_statistic(std::span<const double> trace, std::size_t j) {
    std::vector<double> work(trace.begin(), trace.end());
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(j), work.end());
    return work[j];
}

}  // namespace

double empirical_quantile(std::span<const double> trace, double q) {
    if (trace.empty()) {
        throw insufficient_data_error("empirical_quantile: empty trace");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("empirical_quantile: q must lie strictly inside (0, 1)");
    }
    const auto n = trace.size();
    auto j = static_cast<std::size_t>(std::floor(static_cast<double>(n) * q));
    if (j >= n) j = n - 1;  // guards float roundup at q near 1
    return order_statistic(trace, j);
}

double silverman_bandwidth(std::span<const double> trace) {
    const auto n = trace.size();
    if (n < 2) {
        throw insufficient_data_error("silverman_bandwidth: need at least 2 observations");
    }
    double sum = 0.0;
    for (double y : trace) sum += y;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double y : trace) {
        const double d = y - mean;
        ss += d * d;
    }
    const double s = std::sqrt(ss / static_cast<double>(n - 1));
    const double iqr = empirical_quantile(trace, 0.75) - empirical_quantile(trace, 0.25);

    double spread = std::min(s, iqr / 1.34);
    if (spread <= 0.0) spread = std::max(s, iqr / 1.34);
    if (spread <= 0.0) {
        throw degenerate_data_error("silverman_bandwidth: trace has zero spread");
    }
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

double kde_at(std::span<const double> trace, double x, double h) {
    if (trace.empty()) {
        throw insufficient_data_error("kde_at: empty trace");
    }
    if (!(h > 0.0)) {
        throw std::domain_error("kde_at: bandwidth must be positive");
    }
    double sum = 0.0;
    for (double y : trace) {
        const double z = (x - y) / h;
        sum += std::exp(-0.5 * z * z);
    }
    return kInvSqrt2Pi * sum / (static_cast<double>(trace.size()) * h);
}

double indicator_bm_variance(std::span<const double> trace, double xi_hat, BatchLayout layout) {
    std::vector<double> indicator(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        indicator[i] = trace[i] <= xi_hat ? 1.0 : 0.0;
    }
    return bm_variance(indicator, layout);
}

double indicator_bm_variance(std::span<const double> trace, double xi_hat,
                             const BatchSchedule& sched) {
    if (trace.empty()) {
        throw insufficient_data_error("indicator_bm_variance: empty trace");
    }
    return indicator_bm_variance(trace, xi_hat, batch_size(trace.size(), sched));
}

QuantileEstimate quantile_variance(std::span<const double> trace, double q,
                                   const BatchSchedule& sched) {
    QuantileEstimate est;
    est.q = q;
    est.xi_hat = empirical_quantile(trace, q);
    est.bandwidth = silverman_bandwidth(trace);
    est.f_hat = kde_at(trace, est.xi_hat, est.bandwidth);
    est.sigma2_ind = indicator_bm_variance(trace, est.xi_hat, sched);
    if (!(est.f_hat > 0.0)) {
        throw degenerate_data_error("quantile_variance: density estimate vanished at the quantile");
    }
    est.gamma2_hat = est.sigma2_ind / (est.f_hat * est.f_hat);
    est.lambda_hat = std::sqrt(q * (1.0 - q)) / est.f_hat;
    return est;
}

}  // namespace mcstop
