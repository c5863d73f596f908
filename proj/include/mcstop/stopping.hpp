#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mcstop/core.hpp"
#include "mcstop/mcse.hpp"
#include "mcstop/samplers.hpp"

namespace mcstop {

// The three fixed-width rule families: stop when the full interval width
// plus the penalty drops below
//   Absolute:      epsilon
//   RelMagnitude:  epsilon * |point estimate|
//   RelStdDev:     epsilon * estimated target scale lambda_hat
enum class RuleKind { Absolute, RelMagnitude, RelStdDev };

struct StoppingRule {
    RuleKind kind = RuleKind::Absolute;
    double epsilon = 0.05;
    double delta = 0.05;  // per-interval; interval confidence is 1 - delta
    std::uint64_t n_star = 1000;
    std::uint64_t check_increment = 1;
    std::uint64_t max_iterations = 10'000'000;
};

struct StoppingResult {
    std::uint64_t n_stop = 0;
    std::vector<IntervalEstimate> estimates;  // one per parameter, at n_stop
    StoppingRule rule;
    bool capped = false;  // max_iterations hit before the criterion
};

// p(n) = epsilon * I(n < n_star) + 1/n.  Vanishing guard against stopping on
// an unstable early variance estimate; the indicator also enforces the
// minimum simulation effort.
double penalty(std::uint64_t n, double epsilon, std::uint64_t n_star);

// Right-hand side of the rule inequality.
double threshold(const StoppingRule& rule, const IntervalEstimate& est);

// 2 * half_width + penalty(n) <= threshold, i.e. the full interval width
// (plus penalty) has dropped below the rule's target.
bool criterion_met(const StoppingRule& rule, const IntervalEstimate& est);

// Per-interval delta so that k simultaneous intervals reach at least the
// overall confidence: 1 - overall^{1/k}.  Throws std::domain_error for
// k = 0 or a confidence outside (0, 1).
double bonferroni_delta(double overall_confidence, std::uint64_t k);

// Computes one parameter's interval estimate from a trace snapshot.
// Replaceable so tests can pin lambda_hat or the point estimate.
using EstimatorFn = std::function<IntervalEstimate(
    std::span<const double> trace, const ParameterSpec& spec, double delta,
    const BatchSchedule& sched)>;

// The default: mean_estimate + bm_variance for Mean parameters,
// quantile_variance for Quantile parameters.
IntervalEstimate default_estimator(std::span<const double> trace, const ParameterSpec& spec,
                                   double delta, const BatchSchedule& sched);

struct SequentialOptions {
    BatchSchedule schedule{};
    // Per-parameter epsilon overrides; empty means the rule's scalar epsilon
    // applies to every parameter.
    std::vector<double> per_param_epsilon{};
    EstimatorFn estimator{};  // empty -> default_estimator
};

// Advances the chain to n_star and then in steps of check_increment.  At
// each check every parameter's estimate is recomputed from the full trace
// (batch size and bandwidth change with n); the run stops at the first
// checked n where the criterion holds for all parameters simultaneously.
// Estimator not-ready errors count as "criterion not met".  If the next
// check would exceed max_iterations the result is returned with capped set.
StoppingResult run_sequential(const Sampler& sampler, std::span<const ParameterSpec> specs,
                              const StoppingRule& rule, RngStream& rng,
                              const SequentialOptions& options = {});

// Same, evaluating several rules on one trajectory: each rule receives the
// estimates at its own stopping time, taken from prefixes of a single chain
// run.  All rules must share delta, n_star, check_increment and
// max_iterations (throws std::invalid_argument otherwise).
std::vector<StoppingResult> run_sequential_multi(const Sampler& sampler,
                                                 std::span<const ParameterSpec> specs,
                                                 std::span<const StoppingRule> rules,
                                                 RngStream& rng,
                                                 const SequentialOptions& options = {});

}  // namespace mcstop
