#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mcstop/harness.hpp"

namespace mcstop {

namespace {

// All floating-point output funnels through here: 6 significant digits.
std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// json numbers get the same 6-digit treatment as the text formats
double j6(double v) { return std::strtod(g6(v).c_str(), nullptr); }

int rule_index(RuleKind kind) {
    switch (kind) {
        case RuleKind::Absolute:
            return 1;
        case RuleKind::RelMagnitude:
            return 2;
        case RuleKind::RelStdDev:
            return 3;
    }
    return 0;
}

void check_renderable(const CoverageReport& report) {
    if (report.rules.empty() || report.replications == 0) {
        throw config_error("render_report: report holds no replications");
    }
}

std::string render_csv(const CoverageReport& report) {
    std::ostringstream out;
    out << "rule,epsilon,parameter,kind,q,coverage,coverage_se,mean_nstop,sd_nstop,capped,truth\n";
    for (const ReportRow& row : report_rows(report)) {
        out << row.rule << ',' << g6(row.epsilon) << ',' << row.parameter << ',' << row.kind << ','
            << (row.q ? g6(*row.q) : "") << ',' << g6(row.coverage) << ',' << g6(row.coverage_se)
            << ',' << g6(row.mean_nstop) << ',' << g6(row.sd_nstop) << ',' << row.capped << ','
            << g6(row.truth) << '\n';
    }
    return out.str();
}

std::string render_table(const CoverageReport& report) {
    const auto& params = report.rules.front().parameters;

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Rule", "Length (SD)"};
    for (const auto& p : params) header.push_back(p.id);
    if (report.bonferroni) header.push_back("Region");
    cells.push_back(header);

    for (const auto& rule : report.rules) {
        std::vector<std::string> row{rule_display_name(rule),
                                     g6(rule.mean_nstop) + " (" + g6(rule.sd_nstop) + ")"};
        for (const auto& p : rule.parameters) row.push_back(g6(p.coverage));
        if (rule.has_region) row.push_back(g6(rule.region_coverage));
        cells.push_back(row);
    }

    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }

    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) {
                out << std::string(widths[c] - row[c].size() + 2, ' ');
            }
        }
        out << '\n';
    }

    out << '\n'
        << "sampler: " << report.sampler_id << "  replications: " << report.replications
        << "  confidence: " << g6(report.confidence) << " (per-interval delta " << g6(report.delta)
        << (report.bonferroni ? ", Bonferroni-adjusted" : "") << ")\n";
    for (const auto& rule : report.rules) {
        if (rule.capped > 0) {
            out << "note: " << rule_display_name(rule) << " hit max_iterations in " << rule.capped
                << " replication(s); those runs are excluded from coverage\n";
        }
    }
    return out.str();
}

std::string render_json(const CoverageReport& report) {
    nlohmann::json j;
    j["sampler"] = report.sampler_id;
    j["replications"] = report.replications;
    j["confidence"] = j6(report.confidence);
    j["bonferroni"] = report.bonferroni;
    j["per_interval_delta"] = j6(report.delta);
    j["rules"] = nlohmann::json::array();
    for (const auto& rule : report.rules) {
        nlohmann::json jr;
        jr["rule"] = std::string(rule_kind_name(rule.rule));
        jr["display"] = rule_display_name(rule);
        jr["mean_nstop"] = j6(rule.mean_nstop);
        jr["sd_nstop"] = j6(rule.sd_nstop);
        jr["capped"] = rule.capped;
        jr["scored"] = rule.scored;
        jr["parameters"] = nlohmann::json::array();
        for (const auto& p : rule.parameters) {
            nlohmann::json jp;
            jp["id"] = p.id;
            jp["kind"] = p.kind == ParameterKind::Mean ? "mean" : "quantile";
            if (p.kind == ParameterKind::Quantile) jp["q"] = j6(p.q);
            jp["epsilon"] = j6(p.epsilon);
            jp["truth"] = j6(p.truth);
            jp["coverage"] = j6(p.coverage);
            jp["coverage_se"] = j6(p.coverage_se);
            jr["parameters"].push_back(std::move(jp));
        }
        if (rule.has_region) {
            jr["region"] = {{"coverage", j6(rule.region_coverage)},
                            {"coverage_se", j6(rule.region_se)}};
        }
        j["rules"].push_back(std::move(jr));
    }
    return j.dump(2) + "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

std::string_view rule_kind_name(RuleKind kind) {
    switch (kind) {
        case RuleKind::Absolute:
            return "absolute";
        case RuleKind::RelMagnitude:
            return "rel_magnitude";
        case RuleKind::RelStdDev:
            return "rel_sd";
    }
    return "absolute";
}

std::string rule_display_name(const RuleSummary& rule) {
    double eps = rule.parameters.empty() ? 0.0 : rule.parameters.front().epsilon;
    bool uniform = true;
    for (const auto& p : rule.parameters) uniform = uniform && p.epsilon == eps;
    return "T" + std::to_string(rule_index(rule.rule)) + "(" + (uniform ? g6(eps) : "vec") + ")";
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "table") return ReportFormat::Table;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw config_error("unknown report format '" + std::string(name) +
                       "' (expected table, csv or json)");
}

std::vector<ReportRow> report_rows(const CoverageReport& report) {
    std::vector<ReportRow> rows;
    for (const auto& rule : report.rules) {
        for (const auto& p : rule.parameters) {
            ReportRow row;
            row.rule = std::string(rule_kind_name(rule.rule));
            row.epsilon = p.epsilon;
            row.parameter = p.id;
            row.kind = p.kind == ParameterKind::Mean ? "mean" : "quantile";
            if (p.kind == ParameterKind::Quantile) row.q = p.q;
            row.coverage = p.coverage;
            row.coverage_se = p.coverage_se;
            row.mean_nstop = rule.mean_nstop;
            row.sd_nstop = rule.sd_nstop;
            row.capped = rule.capped;
            row.truth = p.truth;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string render_report(const CoverageReport& report, ReportFormat format) {
    check_renderable(report);
    switch (format) {
        case ReportFormat::Table:
            return render_table(report);
        case ReportFormat::Csv:
            return render_csv(report);
        case ReportFormat::Json:
            return render_json(report);
    }
    return {};
}

void emit_report(const CoverageReport& report, ReportFormat format, const std::string& out_path) {
    const std::string text = render_report(report, format);
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw io_error("cannot write report to '" + out_path + "'");
    }
    out << text;
    if (!out) {
        throw io_error("write failed for '" + out_path + "'");
    }
}

std::vector<ReportRow> parse_report_csv(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) ||
        line != "rule,epsilon,parameter,kind,q,coverage,coverage_se,mean_nstop,sd_nstop,capped,"
                "truth") {
        throw io_error("parse_report_csv: missing or unexpected header");
    }
    std::vector<ReportRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 11) {
            throw io_error("parse_report_csv: line " + std::to_string(lineno) +
                           " has " + std::to_string(f.size()) + " fields, expected 11");
        }
        ReportRow row;
        row.rule = f[0];
        row.epsilon = std::stod(f[1]);
        row.parameter = f[2];
        row.kind = f[3];
        if (!f[4].empty()) row.q = std::stod(f[4]);
        row.coverage = std::stod(f[5]);
        row.coverage_se = std::stod(f[6]);
        row.mean_nstop = std::stod(f[7]);
        row.sd_nstop = std::stod(f[8]);
        row.capped = std::stoull(f[9]);
        row.truth = std::stod(f[10]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace mcstop
