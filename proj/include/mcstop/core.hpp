#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mcstop {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class ParameterKind { Mean, Quantile };

// What to estimate: the mean or a q-quantile of one scalar functional of the
// chain state, selected by `component`.
struct ParameterSpec {
    std::string id;
    ParameterKind kind = ParameterKind::Mean;
    double q = 0.5;  // quantile level, meaningful only for Kind::Quantile
    std::size_t component = 0;

    static ParameterSpec mean(std::string id, std::size_t component = 0);
    // Throws std::invalid_argument unless q lies strictly inside (0, 1).
    static ParameterSpec quantile(std::string id, double q, std::size_t component = 0);
};

// Scalar trajectories, one per tracked parameter, all of a common length.
// Single writer, append-only: values at indices below length() never change.
class TracePool {
public:
    explicit TracePool(std::size_t series_count);

    std::size_t series_count() const { return series_.size(); }
    std::size_t length() const { return length_; }

    // One value per series; throws std::invalid_argument on size mismatch.
    void append(std::span<const double> values);
    void reserve(std::size_t n);

    std::span<const double> series(std::size_t k) const;

private:
    std::vector<std::vector<double>> series_;
    std::size_t length_ = 0;
};

// Point estimate with its Monte Carlo uncertainty at sample size n:
// half_width = z_{delta/2} * sigma_hat / sqrt(n).
struct IntervalEstimate {
    std::uint64_t n = 0;
    double point = 0.0;
    double sigma_hat = 0.0;   // asymptotic-SD estimate
    double lambda_hat = 0.0;  // target-scale estimate
    double half_width = 0.0;
    double delta = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Standard normal quantile Phi^{-1}(p), rational approximation of
// Wichura (1988), algorithm AS 241.  Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

// z_{delta/2} * sigma_hat / sqrt(n).  Throws std::domain_error for n = 0 or
// delta outside (0, 1).
double halfwidth(double sigma_hat, std::uint64_t n, double delta);

// Builds the estimate with half_width computed by halfwidth().
IntervalEstimate make_interval_estimate(std::uint64_t n, double point, double sigma_hat,
                                        double lambda_hat, double delta);

// Open interval: |point - truth| < half_width.
bool interval_contains(const IntervalEstimate& est, double truth);

}  // namespace mcstop
