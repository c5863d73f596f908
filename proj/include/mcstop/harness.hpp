#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcstop/core.hpp"
#include "mcstop/samplers.hpp"
#include "mcstop/stopping.hpp"

namespace mcstop {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested a coverage study against a target with no registered truth.
class unsupported_experiment_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

// Parsed from the line-oriented `key = value` format (see README).
struct ExperimentConfig {
    std::string sampler_id;  // exp_indep | mixture_rw_uniform | mixture_rw_normal
                             // | mixture_gibbs | iid_normal
    MixtureParams mixture{};
    std::vector<ParameterSpec> parameters;
    std::vector<RuleKind> rules;    // one kind, or all three for "rule = all"
    std::vector<double> epsilon;    // size 1 (scalar) or one per parameter
    double confidence = 0.95;       // overall confidence level
    bool bonferroni = false;        // per-interval level = confidence^{1/k}
    std::uint64_t n_star = 1000;
    std::uint64_t check_increment = 500;
    std::uint64_t max_iterations = 10'000'000;
    std::uint64_t replications = 100;
    std::uint64_t seed = 0;
    unsigned workers = 0;  // 0 = hardware concurrency
    std::string out;       // output path; empty = stdout
    std::string format = "table";

    // Per-interval delta: bonferroni_delta(confidence, k) with k the number
    // of parameters when bonferroni is set, otherwise 1 - confidence.
    double per_interval_delta() const;
};

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config_file(const std::string& path);

// Instantiates the configured sampler; throws config_error for unknown ids.
std::unique_ptr<Sampler> make_sampler(const ExperimentConfig& config);

// Registered true value of a parameter under a named target distribution.
// Throws unsupported_experiment_error when no truth is known.
double true_value(std::string_view target, const ParameterSpec& spec,
                  const MixtureParams& mixture = {});
double true_value(const ExperimentConfig& config, const ParameterSpec& spec);

// ---------------------------------------------------------------------------
// Replication studies
// ---------------------------------------------------------------------------

struct ParameterCoverage {
    std::string id;
    ParameterKind kind;
    double q;        // quantile level; unused for Mean
    double epsilon;  // the epsilon applied to this parameter
    double truth;
    double coverage;     // share of scored replications whose interval covers
    double coverage_se;  // sqrt(p(1-p)/r) over scored replications
};

struct RuleSummary {
    RuleKind rule;
    double mean_nstop = 0.0;
    double sd_nstop = 0.0;
    std::uint64_t capped = 0;  // replications that hit max_iterations
    std::uint64_t scored = 0;  // replications entering the coverage counts
    std::vector<ParameterCoverage> parameters;
    bool has_region = false;  // simultaneous region, present under Bonferroni
    double region_coverage = 0.0;
    double region_se = 0.0;
};

struct CoverageReport {
    std::string sampler_id;
    std::uint64_t replications = 0;
    double confidence = 0.0;
    bool bonferroni = false;
    double delta = 0.0;
    std::vector<RuleSummary> rules;
};

// Runs config.replications independent chains (streams 1..r of config.seed),
// applies every configured rule to each trajectory, and scores the resulting
// intervals against the registered truths.  Capped replications are counted
// and excluded from both coverage and stopping-time statistics.
CoverageReport run_replications(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

enum class ReportFormat { Table, Csv, Json };

// Throws config_error for anything but "table", "csv", "json".
ReportFormat parse_report_format(std::string_view name);

// One CSV row per (rule, parameter).
struct ReportRow {
    std::string rule;  // absolute | rel_magnitude | rel_sd
    double epsilon;
    std::string parameter;
    std::string kind;  // mean | quantile
    std::optional<double> q;
    double coverage;
    double coverage_se;
    double mean_nstop;
    double sd_nstop;
    std::uint64_t capped;
    double truth;
};

std::vector<ReportRow> report_rows(const CoverageReport& report);

// Renders the report; all floating-point values at 6 significant digits.
// Throws config_error when the report holds no scored replications.
std::string render_report(const CoverageReport& report, ReportFormat format);

// Writes render_report() output to the path (stdout when empty).  Throws
// io_error with the path in the message when the file cannot be written.
void emit_report(const CoverageReport& report, ReportFormat format, const std::string& out_path);

// Parses render_report(..., Csv) back into rows; inverse of the CSV writer
// up to the 6-significant-digit formatting.
std::vector<ReportRow> parse_report_csv(std::string_view csv);

std::string_view rule_kind_name(RuleKind kind);   // config/CSV token
std::string rule_display_name(const RuleSummary& rule);  // e.g. "T3(0.05)"

}  // namespace mcstop
