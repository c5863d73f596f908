#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "mcstop/harness.hpp"
#include "mcstop/mcse.hpp"

namespace mcstop {

std::unique_ptr<Sampler> make_sampler(const ExperimentConfig& config) {
    const std::string& id = config.sampler_id;
    if (id == "exp_indep") return std::make_unique<ExpIndependenceSampler>();
    if (id == "mixture_rw_uniform") {
        return std::make_unique<MixtureRandomWalkSampler>(ProposalKind::Uniform, config.mixture);
    }
    if (id == "mixture_rw_normal") {
        return std::make_unique<MixtureRandomWalkSampler>(ProposalKind::Normal, config.mixture);
    }
    if (id == "mixture_gibbs") return std::make_unique<MixtureGibbsSampler>(config.mixture);
    if (id == "iid_normal") return std::make_unique<IidNormalSampler>();
    throw config_error("unknown sampler '" + id + "'");
}

double true_value(std::string_view target, const ParameterSpec& spec,
                  const MixtureParams& mixture) {
    if (target == "exp1") {
        if (spec.kind == ParameterKind::Mean) return 1.0;
        return -std::log1p(-spec.q);  // F^{-1}(q) = -log(1 - q)
    }
    if (target == "std_normal") {
        if (spec.kind == ParameterKind::Mean) return 0.0;
        return normal_quantile(spec.q);
    }
    if (target == "mixture") {
        if (spec.kind == ParameterKind::Mean) {
            return mixture_marginal_means(mixture).at(spec.component);
        }
        return mixture_marginal_quantile(mixture, spec.component, spec.q);
    }
    throw unsupported_experiment_error("no registered true value for parameter '" + spec.id +
                                       "' (target '" + std::string(target) + "')");
}

double true_value(const ExperimentConfig& config, const ParameterSpec& spec) {
    return true_value(make_sampler(config)->target(), spec, config.mixture);
}

namespace {

struct RuleOutcome {
    std::uint64_t n_stop = 0;
    bool capped = false;
    std::vector<char> covered;  // per parameter
    bool region_covered = false;
};

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    return mean_estimate(xs).lambda_hat;
}

}  // namespace

CoverageReport run_replications(const ExperimentConfig& config) {
    const auto sampler = make_sampler(config);
    const auto& specs = config.parameters;
    const double delta = config.per_interval_delta();

    std::vector<double> truths(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k) {
        truths[k] = true_value(sampler->target(), specs[k], config.mixture);
    }

    std::vector<StoppingRule> rules;
    rules.reserve(config.rules.size());
    for (RuleKind kind : config.rules) {
        rules.push_back({kind, config.epsilon[0], delta, config.n_star, config.check_increment,
                         config.max_iterations});
    }

    SequentialOptions options;
    if (config.epsilon.size() > 1) options.per_param_epsilon = config.epsilon;

    const auto r = config.replications;
    // One outcome slot per (replication, rule); workers write disjoint slots
    // and aggregation below walks them in replication order.
    std::vector<std::vector<RuleOutcome>> outcomes(r);

    auto run_one = [&](std::uint64_t i) {
        RngStream rng(config.seed, i + 1);
        const auto results = run_sequential_multi(*sampler, specs, rules, rng, options);
        std::vector<RuleOutcome> out(results.size());
        for (std::size_t j = 0; j < results.size(); ++j) {
            out[j].n_stop = results[j].n_stop;
            out[j].capped = results[j].capped;
            out[j].covered.resize(specs.size(), 0);
            bool all = true;
            for (std::size_t k = 0; k < specs.size(); ++k) {
                const bool c =
                    !results[j].capped && interval_contains(results[j].estimates[k], truths[k]);
                out[j].covered[k] = c ? 1 : 0;
                all = all && c;
            }
            out[j].region_covered = all;
        }
        outcomes[i] = std::move(out);
    };

    unsigned workers = config.workers != 0 ? config.workers : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    if (workers > r) workers = static_cast<unsigned>(r);

    if (workers <= 1) {
        for (std::uint64_t i = 0; i < r; ++i) run_one(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t i = next.fetch_add(1); i < r; i = next.fetch_add(1)) {
                    run_one(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    CoverageReport report;
    report.sampler_id = config.sampler_id;
    report.replications = r;
    report.confidence = config.confidence;
    report.bonferroni = config.bonferroni;
    report.delta = delta;

    for (std::size_t j = 0; j < rules.size(); ++j) {
        RuleSummary summary;
        summary.rule = rules[j].kind;

        std::vector<double> nstops;
        std::vector<std::uint64_t> hits(specs.size(), 0);
        std::uint64_t region_hits = 0;
        for (std::uint64_t i = 0; i < r; ++i) {
            const RuleOutcome& o = outcomes[i][j];
            if (o.capped) {
                ++summary.capped;
                continue;
            }
            nstops.push_back(static_cast<double>(o.n_stop));
            for (std::size_t k = 0; k < specs.size(); ++k) hits[k] += o.covered[k];
            region_hits += o.region_covered ? 1 : 0;
        }
        summary.scored = nstops.size();

        const auto scored = static_cast<double>(summary.scored);
        auto proportion_se = [scored](double p) {
            return scored > 0 ? std::sqrt(p * (1.0 - p) / scored) : 0.0;
        };
        if (summary.scored > 0) {
            double sum = 0.0;
            for (double v : nstops) sum += v;
            summary.mean_nstop = sum / scored;
            summary.sd_nstop = sample_sd(nstops);
        } else {
            summary.mean_nstop = std::numeric_limits<double>::quiet_NaN();
            summary.sd_nstop = std::numeric_limits<double>::quiet_NaN();
        }

        for (std::size_t k = 0; k < specs.size(); ++k) {
            ParameterCoverage pc;
            pc.id = specs[k].id;
            pc.kind = specs[k].kind;
            pc.q = specs[k].q;
            pc.epsilon = config.epsilon.size() > 1 ? config.epsilon[k] : config.epsilon[0];
            pc.truth = truths[k];
            pc.coverage = summary.scored > 0 ? static_cast<double>(hits[k]) / scored
                                             : std::numeric_limits<double>::quiet_NaN();
            pc.coverage_se = proportion_se(pc.coverage);
            summary.parameters.push_back(std::move(pc));
        }

        if (config.bonferroni) {
            summary.has_region = true;
            summary.region_coverage = summary.scored > 0
                                          ? static_cast<double>(region_hits) / scored
                                          : std::numeric_limits<double>::quiet_NaN();
            summary.region_se = proportion_se(summary.region_coverage);
        }
        report.rules.push_back(std::move(summary));
    }
    return report;
}

}  // namespace mcstop
