#include "mcstop/stopping.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcstop/errors.hpp"
#include "mcstop/quantile.hpp"

namespace mcstop {

double penalty(std::uint64_t n, double epsilon, std::uint64_t n_star) {
    if (n == 0) {
        throw std::domain_error("penalty: n must be at least 1");
    }
    return (n < n_star ? epsilon : 0.0) + 1.0 / static_cast<double>(n);
}

double threshold(const StoppingRule& rule, const IntervalEstimate& est) {
    switch (rule.kind) {
        case RuleKind::Absolute:
            return rule.epsilon;
        case RuleKind::RelMagnitude:
            return rule.epsilon * std::fabs(est.point);
        case RuleKind::RelStdDev:
            return rule.epsilon * est.lambda_hat;
    }
    return rule.epsilon;
}

bool criterion_met(const StoppingRule& rule, const IntervalEstimate& est) {
    // 2 * half_width is the full interval width.
    return 2.0 * est.half_width + penalty(est.n, rule.epsilon, rule.n_star) <=
           threshold(rule, est);
}

double bonferroni_delta(double overall_confidence, std::uint64_t k) {
    if (k == 0) {
        throw std::domain_error("bonferroni_delta: k must be at least 1");
    }
    if (!(overall_confidence > 0.0 && overall_confidence < 1.0)) {
        throw std::domain_error("bonferroni_delta: confidence must lie strictly inside (0, 1)");
    }
    return 1.0 - std::pow(overall_confidence, 1.0 / static_cast<double>(k));
}

IntervalEstimate default_estimator(std::span<const double> trace, const ParameterSpec& spec,
                                   double delta, const BatchSchedule& sched) {
    if (spec.kind == ParameterKind::Mean) {
        const MeanEstimate me = mean_estimate(trace);
        const double sigma2 = bm_variance(trace, sched);
        return make_interval_estimate(trace.size(), me.mean, std::sqrt(sigma2), me.lambda_hat,
                                      delta);
    }
    const QuantileEstimate qe = quantile_variance(trace, spec.q, sched);
    return make_interval_estimate(trace.size(), qe.xi_hat, std::sqrt(qe.gamma2_hat),
                                  qe.lambda_hat, delta);
}

namespace {

struct DriverSetup {
    std::uint64_t n_star;
    std::uint64_t increment;
    std::uint64_t max_iterations;
    double delta;
};

DriverSetup validate_rules(std::span<const ParameterSpec> specs,
                           std::span<const StoppingRule> rules, const Sampler& sampler,
                           const SequentialOptions& options) {
    if (specs.empty()) {
        throw std::invalid_argument("run_sequential: at least one parameter required");
    }
    if (rules.empty()) {
        throw std::invalid_argument("run_sequential: at least one rule required");
    }
    for (const auto& spec : specs) {
        if (spec.component >= sampler.dimension()) {
            throw std::invalid_argument("run_sequential: parameter component out of range for sampler");
        }
    }
    if (!options.per_param_epsilon.empty() && options.per_param_epsilon.size() != specs.size()) {
        throw std::invalid_argument("run_sequential: per-parameter epsilon count mismatch");
    }
    const DriverSetup setup{rules[0].n_star, rules[0].check_increment, rules[0].max_iterations,
                            rules[0].delta};
    for (const auto& rule : rules) {
        if (rule.n_star != setup.n_star || rule.check_increment != setup.increment ||
            rule.max_iterations != setup.max_iterations || rule.delta != setup.delta) {
            throw std::invalid_argument(
                "run_sequential_multi: rules must share delta, n_star, check_increment and "
                "max_iterations");
        }
        if (!(rule.epsilon > 0.0)) {
            throw std::invalid_argument("run_sequential: epsilon must be positive");
        }
    }
    if (setup.n_star < 1 || setup.increment < 1) {
        throw std::invalid_argument("run_sequential: n_star and check_increment must be >= 1");
    }
    if (setup.n_star > setup.max_iterations) {
        throw std::invalid_argument("run_sequential: n_star exceeds max_iterations");
    }
    return setup;
}

}  // namespace

std::vector<StoppingResult> run_sequential_multi(const Sampler& sampler,
                                                 std::span<const ParameterSpec> specs,
                                                 std::span<const StoppingRule> rules,
                                                 RngStream& rng,
                                                 const SequentialOptions& options) {
    const DriverSetup setup = validate_rules(specs, rules, sampler, options);
    const EstimatorFn& estimate = options.estimator ? options.estimator : default_estimator;

    TracePool pool(specs.size());
    pool.reserve(setup.n_star + setup.increment);
    ChainState state = sampler.initial_state();

    std::vector<double> row(specs.size());
    auto record = [&] {
        for (std::size_t k = 0; k < specs.size(); ++k) {
            row[k] = state.coordinates[specs[k].component];
        }
        pool.append(row);
    };
    record();  // the start state is observation 0

    std::vector<StoppingResult> results(rules.size());
    std::vector<bool> active(rules.size(), true);
    std::size_t remaining = rules.size();

    std::vector<IntervalEstimate> estimates(specs.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (std::uint64_t n_check = setup.n_star;; n_check += setup.increment) {
        while (pool.length() < n_check) {
            sampler.step(state, rng);
            record();
        }

        // One estimate per parameter, shared by every rule at this check.
        // A not-ready estimator leaves the criterion unmet for all rules.
        bool ready = true;
        for (std::size_t k = 0; k < specs.size(); ++k) {
            try {
                estimates[k] = estimate(pool.series(k), specs[k], setup.delta, options.schedule);
            } catch (const insufficient_data_error&) {
                estimates[k] = IntervalEstimate{n_check, nan, nan, nan, nan, setup.delta};
                ready = false;
            } catch (const degenerate_data_error&) {
                estimates[k] = IntervalEstimate{n_check, nan, nan, nan, nan, setup.delta};
                ready = false;
            }
        }

        if (ready) {
            for (std::size_t r = 0; r < rules.size(); ++r) {
                if (!active[r]) continue;
                bool all_met = true;
                for (std::size_t k = 0; k < specs.size(); ++k) {
                    StoppingRule effective = rules[r];
                    if (!options.per_param_epsilon.empty()) {
                        effective.epsilon = options.per_param_epsilon[k];
                    }
                    if (!criterion_met(effective, estimates[k])) {
                        all_met = false;
                        break;
                    }
                }
                if (all_met) {
                    results[r] = {n_check, estimates, rules[r], false};
                    active[r] = false;
                    --remaining;
                }
            }
        }

        if (remaining == 0) break;

        if (n_check + setup.increment > setup.max_iterations) {
            for (std::size_t r = 0; r < rules.size(); ++r) {
                if (active[r]) {
                    results[r] = {n_check, estimates, rules[r], true};
                }
            }
            break;
        }
    }
    return results;
}

StoppingResult run_sequential(const Sampler& sampler, std::span<const ParameterSpec> specs,
                              const StoppingRule& rule, RngStream& rng,
                              const SequentialOptions& options) {
    return run_sequential_multi(sampler, specs, {&rule, 1}, rng, options)[0];
}

}  // namespace mcstop
