// End-to-end acceptance suite.  Each criterion prints one PASS/FAIL line;
// the process exits with the number of failures.  Heavier than the unit
// tests (replication studies at realistic sizes) but still a desk-scale run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mcstop/harness.hpp"
#include "mcstop/quantile.hpp"
#include "test_helpers.hpp"

using namespace mcstop;

namespace {

struct Shared {
    std::string criterion1_csv;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

ExperimentConfig exp_mean_config(RuleKind kind, double eps, std::uint64_t seed) {
    std::ostringstream cfg;
    cfg << "sampler = exp_indep\n"
        << "rule = " << rule_kind_name(kind) << "\n"
        << "epsilon = " << eps << "\n"
        << "confidence = 0.90\n"
        << "n_star = 1000\ncheck_increment = 500\n"
        << "replications = 500\nseed = " << seed << "\nworkers = 2\n"
        << "param = mean mean 0\n";
    return parse_config_text(cfg.str());
}

bool criterion1(std::string& detail, Shared& shared) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = run_replications(exp_mean_config(RuleKind::Absolute, 0.10, 20240601));
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    shared.criterion1_csv = render_report(report, ReportFormat::Csv);

    const auto& rule = report.rules[0];
    const double cov = rule.parameters[0].coverage;
    detail = "coverage " + fmt(cov) + " in [0.844, 0.924], mean n_stop " + fmt(rule.mean_nstop) +
             " in [1830, 3050], " + fmt(elapsed) + "s < 120s";
    return in_range(cov, 0.844, 0.924) && in_range(rule.mean_nstop, 1830.0, 3050.0) &&
           elapsed < 120.0 && rule.capped == 0;
}

bool criterion2(std::string& detail, Shared&) {
    const auto report = run_replications(exp_mean_config(RuleKind::RelStdDev, 0.05, 20240602));
    const auto& rule = report.rules[0];
    const double cov = rule.parameters[0].coverage;
    detail = "coverage " + fmt(cov) + " in [0.848, 0.928], mean n_stop " + fmt(rule.mean_nstop) +
             " in [6675, 11125]";
    return in_range(cov, 0.848, 0.928) && in_range(rule.mean_nstop, 6675.0, 11125.0) &&
           rule.capped == 0;
}

bool criterion3(std::string& detail, Shared&) {
    const auto cfg = parse_config_text(R"(
sampler = exp_indep
rule = rel_sd
epsilon = 0.10
confidence = 0.90
n_star = 1000
check_increment = 500
replications = 500
seed = 20240603
workers = 2
param = median quantile 0.5 0
)");
    const auto report = run_replications(cfg);
    const auto& rule = report.rules[0];
    const double cov = rule.parameters[0].coverage;
    detail = "coverage " + fmt(cov) + " in [0.82, 0.91], mean n_stop " + fmt(rule.mean_nstop) +
             " in [2100, 3500]";
    return in_range(cov, 0.82, 0.91) && in_range(rule.mean_nstop, 2100.0, 3500.0) &&
           rule.capped == 0;
}

bool criterion4(std::string& detail, Shared&) {
    const auto cfg = parse_config_text(R"(
sampler = exp_indep
rule = rel_sd
epsilon = 0.10
confidence = 0.90
bonferroni = true
n_star = 10000
check_increment = 5000
replications = 300
seed = 20240604
workers = 2
param = mean mean 0
param = q10 quantile 0.1 0
param = q90 quantile 0.9 0
)");
    const auto report = run_replications(cfg);
    const auto& rule = report.rules[0];
    const bool all_first_check =
        rule.mean_nstop == 10000.0 && rule.sd_nstop == 0.0 && rule.capped == 0;
    detail = "mean n_stop " + fmt(rule.mean_nstop) + " (sd " + fmt(rule.sd_nstop) +
             ") expected 10000 (0), region coverage " + fmt(rule.region_coverage) + " >= 0.88";
    return all_first_check && rule.region_coverage >= 0.88;
}

bool criterion5(std::string& detail, Shared&) {
    const auto cfg = parse_config_text(R"(
sampler = mixture_gibbs
rule = rel_sd
epsilon = 0.05
confidence = 0.95
n_star = 5000
check_increment = 1000
replications = 300
seed = 20240605
workers = 2
param = x1_mean mean 0
param = x1_q10 quantile 0.1 0
param = x1_q90 quantile 0.9 0
param = x2_mean mean 1
param = x2_q10 quantile 0.1 1
param = x2_q90 quantile 0.9 1
)");
    const auto report = run_replications(cfg);
    const auto& rule = report.rules[0];

    bool coverages_ok = true;
    std::string covs;
    for (const auto& p : rule.parameters) {
        coverages_ok = coverages_ok && in_range(p.coverage, 0.91, 0.98);
        covs += (covs.empty() ? "" : "/") + fmt(p.coverage);
    }
    const bool binds_at_first_check =
        rule.mean_nstop == 5000.0 && rule.sd_nstop == 0.0 && rule.capped == 0;
    const bool in_band = in_range(rule.mean_nstop, 2800.0, 4800.0) && rule.capped == 0;

    // Record which stopping behaviour occurred: the accepted outcomes are a
    // mean inside [2800, 4800] or a uniform stop at the first check n* = 5000.
    std::string nstop_note;
    if (binds_at_first_check) {
        nstop_note = "criterion binds at the first check (n_stop = 5000 uniformly)";
    } else if (in_band) {
        nstop_note = "mean n_stop " + fmt(rule.mean_nstop) + " inside [2800, 4800]";
    } else {
        nstop_note = "mean n_stop " + fmt(rule.mean_nstop) + " (sd " + fmt(rule.sd_nstop) +
                     "): outside [2800, 4800] and not bound at the first check; note the rule"
                     " cannot fire below (2z/eps)^2 = 6147 even for iid draws from this target";
    }
    detail = "coverages " + covs + (coverages_ok ? " all in" : " NOT all in") +
             " [0.91, 0.98]; " + nstop_note;
    return coverages_ok && (in_band || binds_at_first_check);
}

bool criterion6(std::string& detail, Shared&) {
    // epsilon * sqrt(T3(epsilon)) should approach 2 z_{delta/2} when the
    // target scale equals the asymptotic SD, as for iid N(0,1).
    const double eps = 0.05;
    IidNormalSampler sampler;
    const std::vector<ParameterSpec> specs{ParameterSpec::mean("m")};
    const StoppingRule rule{RuleKind::RelStdDev, eps, 0.10, 1000, 100, 10000000};

    double sum = 0.0;
    const int reps = 200;
    for (int i = 1; i <= reps; ++i) {
        RngStream rng(20240606, static_cast<std::uint64_t>(i));
        const auto res = run_sequential(sampler, specs, rule, rng);
        if (res.capped) {
            detail = "replication " + std::to_string(i) + " capped";
            return false;
        }
        sum += eps * std::sqrt(static_cast<double>(res.n_stop));
    }
    const double mean = sum / reps;
    const double target = 2.0 * 1.6448536;
    detail = "mean eps*sqrt(n_stop) = " + fmt(mean) + ", target " + fmt(target) + " +- 10%";
    return std::fabs(mean - target) / target <= 0.10;
}

bool criterion7(std::string& detail, Shared&) {
    RngStream rng(20240607, 0);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const auto n = static_cast<std::size_t>(4 + rng.next_u64() % 61);
        std::vector<double> t(n);
        for (auto& y : t) y = draw_normal(rng) * 3.0 + 1.0;
        for (std::uint64_t b = 1; b <= n / 2; ++b) {
            const std::uint64_t a = n / b;
            const double ours = bm_variance(t, BatchLayout{b, a});
            const double oracle = testutil::oracle_bm_variance(t, b, a);
            const double rel = oracle != 0.0 ? std::fabs(ours - oracle) / std::fabs(oracle)
                                             : std::fabs(ours - oracle);
            worst = std::max(worst, rel);
        }
    }
    if (worst > 1e-12) {
        detail = "batch-means mismatch, worst relative error " + fmt(worst);
        return false;
    }

    // every trace of length <= 8 over a three-letter alphabet
    const double alphabet[3] = {10.0, 20.0, 30.0};
    std::uint64_t checked = 0;
    for (std::size_t n = 1; n <= 8; ++n) {
        std::vector<std::size_t> digits(n, 0);
        while (true) {
            std::vector<double> t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = alphabet[digits[i]];
            for (double q = 0.05; q < 1.0; q += 0.05) {
                if (empirical_quantile(t, q) != testutil::oracle_empirical_quantile(t, q)) {
                    detail = "quantile mismatch at n = " + std::to_string(n);
                    return false;
                }
                ++checked;
            }
            std::size_t i = 0;
            for (; i < n && digits[i] == 2; ++i) digits[i] = 0;
            if (i == n) break;
            ++digits[i];
        }
    }
    detail = "batch-means worst relative error " + fmt(worst) + " <= 1e-12; " +
             std::to_string(checked) + " quantile evaluations exact";
    return true;
}

bool criterion8(std::string& detail, Shared&) {
    int ar_ok = 0;
    for (std::uint64_t s = 1; s <= 50; ++s) {
        const auto t = testutil::ar1_trace(1000000, 0.5, 20240608, s);
        const double v = bm_variance(t);
        if (in_range(v, 3.4, 4.6)) ++ar_ok;
    }

    int q_ok = 0;
    for (std::uint64_t s = 1; s <= 50; ++s) {
        RngStream rng(20240609, s);
        std::vector<double> t(100000);
        for (auto& y : t) y = draw_exponential(rng, 1.0);
        const auto est = quantile_variance(t, 0.5);
        if (in_range(est.gamma2_hat, 0.85, 1.15)) ++q_ok;
    }
    detail = "AR(1) batch-means in [3.4, 4.6] for " + std::to_string(ar_ok) +
             "/50 seeds (need 45); quantile gamma^2 in [0.85, 1.15] for " + std::to_string(q_ok) +
             "/50 seeds (need 45)";
    return ar_ok >= 45 && q_ok >= 45;
}

bool criterion9(std::string& detail, Shared&) {
    IidNormalSampler sampler;
    const std::vector<ParameterSpec> specs{ParameterSpec::mean("m")};

    SequentialOptions pin_lambda;
    pin_lambda.estimator = [](std::span<const double> trace, const ParameterSpec& spec,
                              double delta, const BatchSchedule& sched) {
        auto est = default_estimator(trace, spec, delta, sched);
        est.lambda_hat = 1.0;
        return est;
    };
    SequentialOptions pin_point;
    pin_point.estimator = [](std::span<const double> trace, const ParameterSpec& spec,
                             double delta, const BatchSchedule& sched) {
        auto est = default_estimator(trace, spec, delta, sched);
        est.point = 1.0;
        return est;
    };

    const StoppingRule t1{RuleKind::Absolute, 0.1, 0.10, 200, 50, 10000000};
    StoppingRule t2 = t1;
    t2.kind = RuleKind::RelMagnitude;
    StoppingRule t3 = t1;
    t3.kind = RuleKind::RelStdDev;

    for (std::uint64_t s = 1; s <= 50; ++s) {
        RngStream ra(20240610, s), rb(20240610, s), rc(20240610, s);
        const auto base = run_sequential(sampler, specs, t1, ra);
        const auto rel_sd = run_sequential(sampler, specs, t3, rb, pin_lambda);
        const auto rel_mag = run_sequential(sampler, specs, t2, rc, pin_point);
        if (rel_sd.n_stop != base.n_stop || rel_mag.n_stop != base.n_stop) {
            detail = "mismatch at seed stream " + std::to_string(s);
            return false;
        }
    }
    detail = "T3 (lambda pinned to 1) and T2 (|point| pinned to 1) match T1's n_stop on 50 seeds";
    return true;
}

bool criterion10(std::string& detail, Shared& shared) {
    const auto again = run_replications(exp_mean_config(RuleKind::Absolute, 0.10, 20240601));
    const std::string csv = render_report(again, ReportFormat::Csv);
    const bool same = !shared.criterion1_csv.empty() && csv == shared.criterion1_csv;
    detail = same ? "two executions produced byte-identical csv ("
                        + std::to_string(csv.size()) + " bytes)"
                  : "csv outputs differ";
    return same;
}

}  // namespace

int main() {
    Shared shared;
    struct Entry {
        int id;
        const char* name;
        std::function<bool(std::string&, Shared&)> run;
    };
    const std::vector<Entry> criteria{
        {1, "Exp(1) mean, T1(0.10) coverage study", criterion1},
        {2, "Exp(1) mean, T3(0.05) coverage study", criterion2},
        {3, "Exp(1) median, T3(0.10) coverage study", criterion3},
        {4, "Exp(1) simultaneous (mean, q10, q90), T3(0.10), Bonferroni", criterion4},
        {5, "mixture Gibbs, six parameters, T3(0.05)", criterion5},
        {6, "scaling law: eps*sqrt(n_stop) -> 2z under T3", criterion6},
        {7, "oracle equivalence: batch means and empirical quantile", criterion7},
        {8, "estimator consistency: AR(1) and Exp(1) quantile", criterion8},
        {9, "cross-rule reduction with pinned estimates", criterion9},
        {10, "determinism: byte-identical csv", criterion10},
    };

    int failures = 0;
    for (const auto& entry : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = entry.run(detail, shared);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d: %s — %s [%.1fs]\n", ok ? "PASS" : "FAIL", entry.id,
                    entry.name, detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
