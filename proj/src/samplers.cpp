#include "mcstop/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcstop {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

double log_normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// log of the joint mixture density at (x1, x2).
double mixture_log_density(double x1, double x2, const MixtureParams& p) {
    const double l1 = std::log(p.p) + log_normal_pdf(x1, p.mu11, p.sigma11) +
                      log_normal_pdf(x2, p.mu12, p.sigma12);
    const double l2 = std::log1p(-p.p) + log_normal_pdf(x1, p.mu21, p.sigma21) +
                      log_normal_pdf(x2, p.mu22, p.sigma22);
    const double m = std::max(l1, l2);
    return m + std::log(std::exp(l1 - m) + std::exp(l2 - m));
}

// Every call consumes exactly one uniform so the stream layout per step is
// fixed; u < 1 strictly, so a nonnegative log ratio always accepts.
bool metropolis_accept(double log_ratio, UniformSource& u) {
    return std::log(u.next()) < log_ratio;
}

// 1 / (1 + exp(l)), clamped into the open interval so a Bernoulli pick can
// never be forced by an underflowed weight.
double stable_logistic(double l) {
    double w;
    if (l > 0.0) {
        const double t = std::exp(-l);
        w = t / (1.0 + t);
    } else {
        w = 1.0 / (1.0 + std::exp(l));
    }
    if (w < 1e-300) w = 1e-300;
    const double top = std::nextafter(1.0, 0.0);
    if (w > top) w = top;
    return w;
}

double mixture_cdf(double x, double mu1, double s1, double mu2, double s2, double p) {
    return p * normal_cdf((x - mu1) / s1) + (1.0 - p) * normal_cdf((x - mu2) / s2);
}

}  // namespace

ChainState indep_metropolis_exp_step(const ChainState& state, UniformSource& u) {
    const double x = state.coordinates[0];
    const double y = draw_exponential(u, 2.0);  // proposal mean 2 = rate 1/2
    // Hastings ratio exp(-(y - x)/2); accept when log u < (x - y)/2.
    const bool accept = std::log(u.next()) < (x - y) / 2.0;
    ChainState next = state;
    if (accept) next.coordinates[0] = y;
    ++next.iteration;
    return next;
}

ChainState rw_metropolis_mixture_step(const ChainState& state, UniformSource& u,
                                      ProposalKind proposal, const MixtureParams& params) {
    ChainState next = state;
    double& x1 = next.coordinates[0];
    double& x2 = next.coordinates[1];

    const double y1 = proposal == ProposalKind::Uniform ? x1 + draw_uniform(u, -3.0, 3.0)
                                                        : x1 + 3.0 * draw_normal(u);
    if (metropolis_accept(mixture_log_density(y1, x2, params) -
                              mixture_log_density(x1, x2, params),
                          u)) {
        x1 = y1;
    }

    const double y2 = proposal == ProposalKind::Uniform ? x2 + draw_uniform(u, -30.0, 30.0)
                                                        : x2 + 30.0 * draw_normal(u);
    if (metropolis_accept(mixture_log_density(x1, y2, params) -
                              mixture_log_density(x1, x2, params),
                          u)) {
        x2 = y2;
    }

    ++next.iteration;
    return next;
}

double gibbs_weight_x1_given_x2(double x2, const MixtureParams& p) {
    const double z1 = (x2 - p.mu12) / p.sigma12;
    const double z2 = (x2 - p.mu22) / p.sigma22;
    const double l = std::log((1.0 - p.p) * p.sigma12 / (p.p * p.sigma22)) +
                     0.5 * (z1 * z1 - z2 * z2);
    return stable_logistic(l);
}

double gibbs_weight_x2_given_x1(double x1, const MixtureParams& p) {
    const double z1 = (x1 - p.mu11) / p.sigma11;
    const double z2 = (x1 - p.mu21) / p.sigma21;
    const double l = std::log((1.0 - p.p) * p.sigma11 / (p.p * p.sigma21)) +
                     0.5 * (z1 * z1 - z2 * z2);
    return stable_logistic(l);
}

ChainState gibbs_mixture_step(const ChainState& state, UniformSource& u,
                              const MixtureParams& params) {
    ChainState next = state;
    double& x1 = next.coordinates[0];
    double& x2 = next.coordinates[1];

    const double w1 = gibbs_weight_x1_given_x2(x2, params);
    if (u.next() < w1) {
        x1 = params.mu11 + params.sigma11 * draw_normal(u);
    } else {
        x1 = params.mu21 + params.sigma21 * draw_normal(u);
    }

    const double w2 = gibbs_weight_x2_given_x1(x1, params);
    if (u.next() < w2) {
        x2 = params.mu12 + params.sigma12 * draw_normal(u);
    } else {
        x2 = params.mu22 + params.sigma22 * draw_normal(u);
    }

    ++next.iteration;
    return next;
}

ChainState rw_metropolis_generic_step(const ChainState& state, UniformSource& u,
                                      const LogDensity& log_target,
                                      std::span<const double> scales,
                                      std::uint64_t* nan_rejects) {
    if (scales.size() != state.coordinates.size()) {
        throw std::invalid_argument("rw_metropolis_generic_step: scales/state dimension mismatch");
    }
    ChainState next = state;
    double log_current = log_target(next.coordinates);
    for (std::size_t k = 0; k < scales.size(); ++k) {
        const double old = next.coordinates[k];
        next.coordinates[k] = old + scales[k] * draw_normal(u);
        const double log_proposed = log_target(next.coordinates);
        if (std::isnan(log_proposed)) {
            if (nan_rejects != nullptr) ++*nan_rejects;
            u.next();
            next.coordinates[k] = old;
            continue;
        }
        if (metropolis_accept(log_proposed - log_current, u)) {
            log_current = log_proposed;
        } else {
            next.coordinates[k] = old;
        }
    }
    ++next.iteration;
    return next;
}

std::array<double, 2> mixture_marginal_means(const MixtureParams& p) {
    return {p.p * p.mu11 + (1.0 - p.p) * p.mu21, p.p * p.mu12 + (1.0 - p.p) * p.mu22};
}

std::array<double, 2> mixture_marginal_variances(const MixtureParams& p) {
    const auto means = mixture_marginal_means(p);
    const double m1 = p.p * (p.sigma11 * p.sigma11 + p.mu11 * p.mu11) +
                      (1.0 - p.p) * (p.sigma21 * p.sigma21 + p.mu21 * p.mu21);
    const double m2 = p.p * (p.sigma12 * p.sigma12 + p.mu12 * p.mu12) +
                      (1.0 - p.p) * (p.sigma22 * p.sigma22 + p.mu22 * p.mu22);
    return {m1 - means[0] * means[0], m2 - means[1] * means[1]};
}

double mixture_marginal_quantile(const MixtureParams& p, std::size_t coord, double q) {
    if (coord > 1) {
        throw std::invalid_argument("mixture_marginal_quantile: coordinate must be 0 or 1");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("mixture_marginal_quantile: q must lie strictly inside (0, 1)");
    }
    const double mu1 = coord == 0 ? p.mu11 : p.mu12;
    const double mu2 = coord == 0 ? p.mu21 : p.mu22;
    const double s1 = coord == 0 ? p.sigma11 : p.sigma12;
    const double s2 = coord == 0 ? p.sigma21 : p.sigma22;

    const double smax = std::max(s1, s2);
    double lo = std::min(mu1, mu2) - 40.0 * smax;
    double hi = std::max(mu1, mu2) + 40.0 * smax;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (mixture_cdf(mid, mu1, s1, mu2, s2, p.p) < q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void ExpIndependenceSampler::step(ChainState& state, UniformSource& u) const {
    state = indep_metropolis_exp_step(state, u);
}

ChainState MixtureRandomWalkSampler::initial_state() const {
    const auto means = mixture_marginal_means(params_);
    return {{means[0], means[1]}, 0};
}

void MixtureRandomWalkSampler::step(ChainState& state, UniformSource& u) const {
    state = rw_metropolis_mixture_step(state, u, proposal_, params_);
}

ChainState MixtureGibbsSampler::initial_state() const {
    const auto means = mixture_marginal_means(params_);
    return {{means[0], means[1]}, 0};
}

void MixtureGibbsSampler::step(ChainState& state, UniformSource& u) const {
    state = gibbs_mixture_step(state, u, params_);
}

void IidNormalSampler::step(ChainState& state, UniformSource& u) const {
    state.coordinates[0] = draw_normal(u);
    ++state.iteration;
}

GenericRandomWalkSampler::GenericRandomWalkSampler(LogDensity log_target,
                                                   std::vector<double> scales,
                                                   std::vector<double> initial)
    : log_target_(std::move(log_target)), scales_(std::move(scales)), initial_(std::move(initial)) {
    if (!log_target_) {
        throw std::invalid_argument("GenericRandomWalkSampler: log target required");
    }
    if (scales_.empty() || scales_.size() != initial_.size()) {
        throw std::invalid_argument("GenericRandomWalkSampler: scales/initial dimension mismatch");
    }
    for (double s : scales_) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("GenericRandomWalkSampler: proposal scales must be positive");
        }
    }
}

void GenericRandomWalkSampler::step(ChainState& state, UniformSource& u) const {
    std::uint64_t rejects = 0;
    state = rw_metropolis_generic_step(state, u, log_target_, scales_, &rejects);
    if (rejects > 0) nan_rejects_.fetch_add(rejects);
}

}  // namespace mcstop
