// mcstop — terminate MCMC simulations with sequential fixed-width stopping
// rules, and reproduce coverage studies against built-in targets.
//
//   mcstop run      --config cfg   single sequential run, one chain
//   mcstop coverage --config cfg   replication study -> coverage report
//   mcstop truth    --config cfg   print registered true values

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcstop/harness.hpp"

namespace {

using namespace mcstop;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> format;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file")->required();
    cmd->add_option("--seed", flags.seed, "override the config base seed");
    cmd->add_option("--workers", flags.workers, "worker threads (0 = hardware concurrency)");
    cmd->add_option("--format", flags.format, "output format: table, csv or json");
    cmd->add_option("--out", flags.out, "write output to this path instead of stdout");
}

ExperimentConfig load(const CommonFlags& flags) {
    ExperimentConfig cfg = parse_config_file(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.workers) cfg.workers = *flags.workers;
    if (flags.format) cfg.format = *flags.format;
    if (flags.out) cfg.out = *flags.out;
    return cfg;
}

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_text(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write to '" + path + "'");
    out << text;
    if (!out) throw io_error("write failed for '" + path + "'");
}

int cmd_coverage(const CommonFlags& flags) {
    const ExperimentConfig cfg = load(flags);
    const CoverageReport report = run_replications(cfg);
    emit_report(report, parse_report_format(cfg.format), cfg.out);
    return 0;
}

int cmd_run(const CommonFlags& flags) {
    const ExperimentConfig cfg = load(flags);
    const auto sampler = make_sampler(cfg);
    const double delta = cfg.per_interval_delta();

    std::vector<StoppingRule> rules;
    for (RuleKind kind : cfg.rules) {
        rules.push_back({kind, cfg.epsilon[0], delta, cfg.n_star, cfg.check_increment,
                         cfg.max_iterations});
    }
    SequentialOptions options;
    if (cfg.epsilon.size() > 1) options.per_param_epsilon = cfg.epsilon;

    RngStream rng(cfg.seed, 1);
    const auto results = run_sequential_multi(*sampler, cfg.parameters, rules, rng, options);

    const ReportFormat format = parse_report_format(cfg.format);
    std::ostringstream text;
    if (format == ReportFormat::Json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& res : results) {
            nlohmann::json jr;
            jr["rule"] = std::string(rule_kind_name(res.rule.kind));
            jr["epsilon"] = res.rule.epsilon;
            jr["n_stop"] = res.n_stop;
            jr["capped"] = res.capped;
            jr["estimates"] = nlohmann::json::array();
            for (std::size_t k = 0; k < cfg.parameters.size(); ++k) {
                const auto& est = res.estimates[k];
                jr["estimates"].push_back(
                    {{"id", cfg.parameters[k].id},
                     {"point", est.point},
                     {"mcse", est.sigma_hat / std::sqrt(static_cast<double>(est.n))},
                     {"half_width", est.half_width},
                     {"lambda_hat", est.lambda_hat}});
            }
            j.push_back(std::move(jr));
        }
        text << j.dump(2) << '\n';
    } else if (format == ReportFormat::Csv) {
        text << "rule,epsilon,n_stop,capped,parameter,point,mcse,half_width,lambda_hat\n";
        for (const auto& res : results) {
            for (std::size_t k = 0; k < cfg.parameters.size(); ++k) {
                const auto& est = res.estimates[k];
                const double mcse = est.sigma_hat / std::sqrt(static_cast<double>(est.n));
                text << rule_kind_name(res.rule.kind) << ',' << g6(res.rule.epsilon) << ','
                     << res.n_stop << ',' << (res.capped ? 1 : 0) << ',' << cfg.parameters[k].id
                     << ',' << g6(est.point) << ',' << g6(mcse) << ',' << g6(est.half_width) << ','
                     << g6(est.lambda_hat) << '\n';
            }
        }
    } else {
        for (const auto& res : results) {
            text << "rule " << rule_kind_name(res.rule.kind) << " (epsilon "
                 << g6(res.rule.epsilon) << "): n_stop = " << res.n_stop
                 << (res.capped ? "  [capped: max_iterations reached]" : "") << '\n';
            for (std::size_t k = 0; k < cfg.parameters.size(); ++k) {
                const auto& est = res.estimates[k];
                const double mcse = est.sigma_hat / std::sqrt(static_cast<double>(est.n));
                text << "  " << cfg.parameters[k].id << ": point " << g6(est.point) << "  mcse "
                     << g6(mcse) << "  half-width " << g6(est.half_width) << "  lambda "
                     << g6(est.lambda_hat) << '\n';
            }
        }
    }
    write_text(text.str(), cfg.out);
    return 0;
}

int cmd_truth(const CommonFlags& flags) {
    const ExperimentConfig cfg = load(flags);
    const auto sampler = make_sampler(cfg);
    const ReportFormat format = parse_report_format(cfg.format);

    std::ostringstream text;
    if (format == ReportFormat::Json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& spec : cfg.parameters) {
            j.push_back({{"id", spec.id},
                         {"kind", spec.kind == ParameterKind::Mean ? "mean" : "quantile"},
                         {"truth", true_value(sampler->target(), spec, cfg.mixture)}});
        }
        text << j.dump(2) << '\n';
    } else {
        if (format == ReportFormat::Csv) text << "parameter,kind,q,truth\n";
        for (const auto& spec : cfg.parameters) {
            const double truth = true_value(sampler->target(), spec, cfg.mixture);
            if (format == ReportFormat::Csv) {
                text << spec.id << ',' << (spec.kind == ParameterKind::Mean ? "mean" : "quantile")
                     << ',' << (spec.kind == ParameterKind::Quantile ? g6(spec.q) : "") << ','
                     << g6(truth) << '\n';
            } else {
                text << spec.id << " = " << g6(truth) << '\n';
            }
        }
    }
    write_text(text.str(), cfg.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequential fixed-width stopping rules for MCMC"};
    app.require_subcommand(1);

    CommonFlags run_flags, coverage_flags, truth_flags;
    CLI::App* run = app.add_subcommand("run", "single sequential run");
    add_common(run, run_flags);
    CLI::App* coverage = app.add_subcommand("coverage", "replication coverage study");
    add_common(coverage, coverage_flags);
    CLI::App* truth = app.add_subcommand("truth", "print registered true values");
    add_common(truth, truth_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (coverage->parsed()) return cmd_coverage(coverage_flags);
        if (truth->parsed()) return cmd_truth(truth_flags);
    } catch (const unsupported_experiment_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
