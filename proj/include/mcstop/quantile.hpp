#pragma once

#include <span>

#include "mcstop/mcse.hpp"

namespace mcstop {

// Everything needed for a confidence interval on a q-quantile:
// gamma2_hat = sigma2_ind / f_hat^2 is the variance in the quantile CLT,
// lambda_hat = sqrt(q(1-q)) / f_hat the target-scale estimate.
struct QuantileEstimate {
    double q;
    double xi_hat;      // empirical quantile
    double f_hat;       // kernel density estimate at xi_hat
    double sigma2_ind;  // batch-means variance of the indicator process
    double gamma2_hat;
    double lambda_hat;
    double bandwidth;
};

// Inverse of the empirical distribution function: the (j+1)-th order
// statistic with j = floor(n*q).  Throws insufficient_data_error on an
// empty trace, std::domain_error for q outside (0, 1).
double empirical_quantile(std::span<const double> trace, double q);

// Rule-of-thumb bandwidth 0.9 * min(s, IQR/1.34) * n^{-1/5}; falls back to
// whichever of s, IQR is nonzero.  Throws degenerate_data_error when the
// trace is constant, insufficient_data_error for fewer than 2 points.
double silverman_bandwidth(std::span<const double> trace);

// Gaussian kernel density estimate at x.  Throws std::domain_error for
// h <= 0, insufficient_data_error on an empty trace.
double kde_at(std::span<const double> trace, double x, double h);

// bm_variance applied to the indicator sequence I(Y_i <= xi_hat).
double indicator_bm_variance(std::span<const double> trace, double xi_hat,
                             const BatchSchedule& sched = {});
double indicator_bm_variance(std::span<const double> trace, double xi_hat, BatchLayout layout);

// Full quantile pipeline: empirical quantile, Silverman bandwidth, density
// at the quantile, indicator batch means.  Propagates constituent errors
// and throws degenerate_data_error if the density estimate vanishes.
QuantileEstimate quantile_variance(std::span<const double> trace, double q,
                                   const BatchSchedule& sched = {});

}  // namespace mcstop
