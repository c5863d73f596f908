#include "mcstop/mcse.hpp"

#include <cmath>
#include <stdexcept>

#include "mcstop/errors.hpp"

namespace mcstop {

namespace {

// floor(sqrt(n)) with an integer fixup; pow() alone can land one off at
// perfect squares.
std::uint64_t floor_sqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// floor(n^tau) for general tau, resolving the float boundary by log
// comparison: b <= n^tau  <=>  log b <= tau log n.
std::uint64_t floor_pow(std::uint64_t n, double tau) {
    if (tau == 0.5) return floor_sqrt(n);
    const long double target = static_cast<long double>(tau) * std::log(static_cast<long double>(n));
    auto below = [target](std::uint64_t b) {
        return std::log(static_cast<long double>(b)) <= target + 1e-12L;
    };
    auto b = static_cast<std::uint64_t>(
        std::pow(static_cast<double>(n), tau));
    if (b == 0) b = 1;
    while (below(b + 1)) ++b;
    while (b > 1 && !below(b)) --b;
    return b;
}

}  // namespace

BatchLayout batch_size(std::uint64_t n, const BatchSchedule& sched) {
    if (n == 0) {
        throw std::domain_error("batch_size: n must be at least 1");
    }
    if (!(sched.tau > 0.0 && sched.tau < 1.0)) {
        throw std::domain_error("batch_size: tau must lie strictly inside (0, 1)");
    }
    std::uint64_t b = floor_pow(n, sched.tau);
    if (sched.mode == BatchMode::PowerOfTwo) {
        std::uint64_t p = 1;
        while (p * 2 <= b) p *= 2;
        b = p;
    }
    if (b < 1) b = 1;
    return {b, n / b};
}

MeanEstimate mean_estimate(std::span<const double> trace) {
    const std::size_t n = trace.size();
    if (n < 2) {
        throw insufficient_data_error("mean_estimate: need at least 2 observations");
    }
    double sum = 0.0;
    for (double y : trace) sum += y;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double y : trace) {
        const double d = y - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

double bm_variance(std::span<const double> trace, BatchLayout layout) {
    const std::uint64_t n = trace.size();
    const std::uint64_t b = layout.batch_size;
    const std::uint64_t a = layout.batch_count;
    if (b == 0 || a * b > n) {
        throw std::invalid_argument("bm_variance: layout does not fit the trace");
    }
    if (a < 2) {
        throw insufficient_data_error("bm_variance: need at least 2 batches");
    }

    // Grand mean over all n observations; the a*b..n-1 tail contributes to
    // it even though it belongs to no batch.
    double sum = 0.0;
    for (double y : trace) sum += y;
    const double grand = sum / static_cast<double>(n);

    double ss = 0.0;
    for (std::uint64_t j = 0; j < a; ++j) {
        double batch_sum = 0.0;
        for (std::uint64_t i = j * b; i < (j + 1) * b; ++i) {
            batch_sum += trace[i];
        }
        const double d = batch_sum / static_cast<double>(b) - grand;
        ss += d * d;
    }
    return static_cast<double>(b) / static_cast<double>(a - 1) * ss;
}

double bm_variance(std::span<const double> trace, const BatchSchedule& sched) {
    if (trace.empty()) {
        throw insufficient_data_error("bm_variance: empty trace");
    }
    return bm_variance(trace, batch_size(trace.size(), sched));
}

}  // namespace mcstop
