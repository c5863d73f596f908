#pragma once

#include <cstdint>
#include <span>

namespace mcstop {

// Batch-size schedule b_n for the batch-means variance estimator.
// FloorPow: b_n = floor(n^tau).  PowerOfTwo: largest power of two not
// exceeding floor(n^tau), useful when batches are to be merged pairwise
// under memory pressure.
enum class BatchMode { FloorPow, PowerOfTwo };

struct BatchSchedule {
    double tau = 0.5;
    BatchMode mode = BatchMode::FloorPow;
};

struct BatchLayout {
    std::uint64_t batch_size;   // b_n >= 1
    std::uint64_t batch_count;  // a_n = floor(n / b_n)
};

// Layout for a trace of length n under the schedule.  n >= 1 required.
BatchLayout batch_size(std::uint64_t n, const BatchSchedule& sched = {});

struct MeanEstimate {
    double mean;        // sample mean of the trace
    double lambda_hat;  // sample standard deviation, divisor n - 1
};

// Throws insufficient_data_error for traces shorter than 2.
MeanEstimate mean_estimate(std::span<const double> trace);

// Batch-means estimate of the asymptotic variance of the sample mean:
// split the first a_n*b_n observations into a_n disjoint batches of length
// b_n, and return b_n/(a_n - 1) * sum_j (Ybar_j - gbar_n)^2 with gbar_n the
// mean of all n observations.  Throws insufficient_data_error when a_n < 2.
double bm_variance(std::span<const double> trace, const BatchSchedule& sched = {});

// Same estimator with the batch size pinned explicitly.
double bm_variance(std::span<const double> trace, BatchLayout layout);

}  // namespace mcstop
