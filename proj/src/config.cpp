#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mcstop/harness.hpp"

namespace mcstop {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: '" + key + "' expects a number, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw config_error("config: '" + key + "' expects a nonnegative integer, got '" + value +
                           "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw config_error("config: '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<RuleKind> parse_rules(const std::string& value) {
    if (value == "absolute") return {RuleKind::Absolute};
    if (value == "rel_magnitude") return {RuleKind::RelMagnitude};
    if (value == "rel_sd") return {RuleKind::RelStdDev};
    if (value == "all") return {RuleKind::Absolute, RuleKind::RelMagnitude, RuleKind::RelStdDev};
    throw config_error("config: unknown rule '" + value +
                       "' (expected absolute, rel_magnitude, rel_sd or all)");
}

std::vector<double> parse_epsilon_list(const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            throw config_error("config: empty entry in epsilon list '" + value + "'");
        }
        out.push_back(parse_double("epsilon", item));
    }
    if (out.empty()) {
        throw config_error("config: 'epsilon' must hold at least one value");
    }
    return out;
}

// param = <id> mean [component]
// param = <id> quantile <q> [component]
ParameterSpec parse_param(const std::string& value) {
    const auto tok = split_ws(value);
    if (tok.size() >= 2 && tok[1] == "mean" && tok.size() <= 3) {
        const std::size_t component = tok.size() == 3 ? parse_u64("param", tok[2]) : 0;
        return ParameterSpec::mean(tok[0], component);
    }
    if (tok.size() >= 3 && tok[1] == "quantile" && tok.size() <= 4) {
        const double q = parse_double("param", tok[2]);
        if (!(q > 0.0 && q < 1.0)) {
            throw config_error("config: quantile level must lie strictly inside (0, 1) in 'param = " +
                               value + "'");
        }
        const std::size_t component = tok.size() == 4 ? parse_u64("param", tok[3]) : 0;
        return ParameterSpec::quantile(tok[0], q, component);
    }
    throw config_error("config: cannot parse 'param = " + value +
                       "' (expected '<id> mean [component]' or '<id> quantile <q> [component]')");
}

std::size_t sampler_dimension(const std::string& id) {
    if (id == "exp_indep" || id == "iid_normal") return 1;
    if (id == "mixture_rw_uniform" || id == "mixture_rw_normal" || id == "mixture_gibbs") return 2;
    throw config_error("config: unknown sampler '" + id + "'");
}

void validate(const ExperimentConfig& cfg) {
    const std::size_t dim = sampler_dimension(cfg.sampler_id);
    if (cfg.parameters.empty()) {
        throw config_error("config: at least one 'param' line required");
    }
    for (std::size_t i = 0; i < cfg.parameters.size(); ++i) {
        const auto& p = cfg.parameters[i];
        if (p.id.empty() || p.id.find(',') != std::string::npos) {
            throw config_error("config: parameter ids must be nonempty and comma-free");
        }
        if (p.component >= dim) {
            throw config_error("config: parameter '" + p.id + "' tracks component " +
                               std::to_string(p.component) + " but the sampler has dimension " +
                               std::to_string(dim));
        }
        for (std::size_t j = i + 1; j < cfg.parameters.size(); ++j) {
            if (cfg.parameters[j].id == p.id) {
                throw config_error("config: duplicate parameter id '" + p.id + "'");
            }
        }
    }
    if (cfg.epsilon.empty()) {
        throw config_error("config: 'epsilon' is required");
    }
    if (cfg.epsilon.size() != 1 && cfg.epsilon.size() != cfg.parameters.size()) {
        throw config_error("config: epsilon list must hold one value or one per parameter");
    }
    for (double e : cfg.epsilon) {
        if (!(e > 0.0)) throw config_error("config: epsilon values must be positive");
    }
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
        throw config_error("config: confidence must lie strictly inside (0, 1)");
    }
    if (cfg.rules.empty()) {
        throw config_error("config: 'rule' is required");
    }
    if (cfg.replications < 1) {
        throw config_error("config: replications must be at least 1");
    }
    if (cfg.n_star < 1 || cfg.check_increment < 1) {
        throw config_error("config: n_star and check_increment must be at least 1");
    }
    if (cfg.n_star > cfg.max_iterations) {
        throw config_error("config: n_star exceeds max_iterations");
    }
    parse_report_format(cfg.format);
}

}  // namespace

double ExperimentConfig::per_interval_delta() const {
    return bonferroni_delta(confidence, bonferroni ? parameters.size() : 1);
}

ExperimentConfig parse_config_text(std::string_view text) {
    ExperimentConfig cfg;
    bool have_sampler = false;
    bool have_rule = false;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (const auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        const std::string line = trim(raw);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw config_error("config line " + std::to_string(lineno) +
                               ": empty key or value");
        }

        if (key == "sampler") {
            cfg.sampler_id = value;
            have_sampler = true;
        } else if (key == "rule") {
            cfg.rules = parse_rules(value);
            have_rule = true;
        } else if (key == "epsilon") {
            cfg.epsilon = parse_epsilon_list(value);
        } else if (key == "confidence") {
            cfg.confidence = parse_double(key, value);
        } else if (key == "bonferroni") {
            cfg.bonferroni = parse_bool(key, value);
        } else if (key == "n_star") {
            cfg.n_star = parse_u64(key, value);
        } else if (key == "check_increment") {
            cfg.check_increment = parse_u64(key, value);
        } else if (key == "max_iterations") {
            cfg.max_iterations = parse_u64(key, value);
        } else if (key == "replications") {
            cfg.replications = parse_u64(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_u64(key, value);
        } else if (key == "workers") {
            cfg.workers = static_cast<unsigned>(parse_u64(key, value));
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "format") {
            cfg.format = value;
        } else if (key == "param") {
            cfg.parameters.push_back(parse_param(value));
        } else if (key == "mixture.p") {
            cfg.mixture.p = parse_double(key, value);
        } else if (key == "mixture.mu11") {
            cfg.mixture.mu11 = parse_double(key, value);
        } else if (key == "mixture.mu12") {
            cfg.mixture.mu12 = parse_double(key, value);
        } else if (key == "mixture.mu21") {
            cfg.mixture.mu21 = parse_double(key, value);
        } else if (key == "mixture.mu22") {
            cfg.mixture.mu22 = parse_double(key, value);
        } else if (key == "mixture.sigma11") {
            cfg.mixture.sigma11 = parse_double(key, value);
        } else if (key == "mixture.sigma12") {
            cfg.mixture.sigma12 = parse_double(key, value);
        } else if (key == "mixture.sigma21") {
            cfg.mixture.sigma21 = parse_double(key, value);
        } else if (key == "mixture.sigma22") {
            cfg.mixture.sigma22 = parse_double(key, value);
        } else {
            throw config_error("config line " + std::to_string(lineno) + ": unknown key '" + key +
                               "'");
        }
    }

    if (!have_sampler) throw config_error("config: 'sampler' is required");
    if (!have_rule) throw config_error("config: 'rule' is required");
    validate(cfg);
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace mcstop
