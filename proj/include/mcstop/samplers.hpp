#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcstop/rng.hpp"

namespace mcstop {

struct ChainState {
    std::vector<double> coordinates;
    std::uint64_t iteration = 0;
};

// Two-component bivariate normal mixture with diagonal covariances,
// p * N2((mu11, mu12), diag(s11^2, s12^2)) + (1-p) * N2((mu21, mu22), ...).
struct MixtureParams {
    double p = 0.25;
    double mu11 = 1.0, mu12 = 10.0;
    double mu21 = 2.5, mu22 = 25.0;
    double sigma11 = 0.5, sigma12 = 5.0;
    double sigma21 = 0.7, sigma22 = 7.0;
};

enum class ProposalKind { Uniform, Normal };

using LogDensity = std::function<double(std::span<const double>)>;

// ---------------------------------------------------------------------------
// Step functions (stateless; all randomness through the UniformSource)
// ---------------------------------------------------------------------------

// Independence Metropolis for an Exp(1) target with an exponential proposal
// of MEAN 2, i.e. rate 1/2.  With that parameterization the Hastings ratio
// f(y)q(x) / (f(x)q(y)) collapses to exp(-(y - x)/2).
ChainState indep_metropolis_exp_step(const ChainState& state, UniformSource& u);

// Component-wise random-walk Metropolis on the mixture target: coordinate 1
// then coordinate 2, each accepted against the joint density.  Uniform
// proposals are Unif(-3,3) / Unif(-30,30), normal proposals N(0,3^2) /
// N(0,30^2) for the two coordinates.
ChainState rw_metropolis_mixture_step(const ChainState& state, UniformSource& u,
                                      ProposalKind proposal, const MixtureParams& params);

// Gibbs sampler from the full conditionals: each coordinate given the other
// is again a two-component normal mixture whose weight is the posterior
// probability of component 1.  Weights are computed in log space; the
// exponent is quadratic in x and overflows double far inside the support.
ChainState gibbs_mixture_step(const ChainState& state, UniformSource& u,
                              const MixtureParams& params);

// Posterior probability of component 1 given the other coordinate.
double gibbs_weight_x1_given_x2(double x2, const MixtureParams& params);
double gibbs_weight_x2_given_x1(double x1, const MixtureParams& params);

// Component-wise normal random-walk Metropolis against an arbitrary
// log-density.  Proposals with NaN log-density are rejected; when
// nan_rejects is non-null it is incremented for each such rejection.
ChainState rw_metropolis_generic_step(const ChainState& state, UniformSource& u,
                                      const LogDensity& log_target,
                                      std::span<const double> scales,
                                      std::uint64_t* nan_rejects = nullptr);

// ---------------------------------------------------------------------------
// Exact target values for the mixture marginals
// ---------------------------------------------------------------------------

std::array<double, 2> mixture_marginal_means(const MixtureParams& params);
std::array<double, 2> mixture_marginal_variances(const MixtureParams& params);
// Marginal q-quantile by bisection on the mixture CDF, |error| <= 1e-10.
double mixture_marginal_quantile(const MixtureParams& params, std::size_t coord, double q);

// ---------------------------------------------------------------------------
// Chain sources for the sequential driver
// ---------------------------------------------------------------------------

class Sampler {
public:
    virtual ~Sampler() = default;
    virtual std::size_t dimension() const = 0;
    virtual ChainState initial_state() const = 0;
    virtual void step(ChainState& state, UniformSource& u) const = 0;
    // Identifier of the invariant distribution, used to look up true values;
    // empty when no truth is registered.
    virtual std::string target() const = 0;
};

class ExpIndependenceSampler final : public Sampler {
public:
    std::size_t dimension() const override { return 1; }
    ChainState initial_state() const override { return {{1.0}, 0}; }
    void step(ChainState& state, UniformSource& u) const override;
    std::string target() const override { return "exp1"; }
};

class MixtureRandomWalkSampler final : public Sampler {
public:
    explicit MixtureRandomWalkSampler(ProposalKind proposal, MixtureParams params = {})
        : proposal_(proposal), params_(params) {}
    std::size_t dimension() const override { return 2; }
    ChainState initial_state() const override;
    void step(ChainState& state, UniformSource& u) const override;
    std::string target() const override { return "mixture"; }
    const MixtureParams& params() const { return params_; }

private:
    ProposalKind proposal_;
    MixtureParams params_;
};

class MixtureGibbsSampler final : public Sampler {
public:
    explicit MixtureGibbsSampler(MixtureParams params = {}) : params_(params) {}
    std::size_t dimension() const override { return 2; }
    ChainState initial_state() const override;
    void step(ChainState& state, UniformSource& u) const override;
    std::string target() const override { return "mixture"; }
    const MixtureParams& params() const { return params_; }

private:
    MixtureParams params_;
};

// Fresh N(0,1) draw each iteration; the no-autocorrelation baseline.
class IidNormalSampler final : public Sampler {
public:
    std::size_t dimension() const override { return 1; }
    ChainState initial_state() const override { return {{0.0}, 0}; }
    void step(ChainState& state, UniformSource& u) const override;
    std::string target() const override { return "std_normal"; }
};

class GenericRandomWalkSampler final : public Sampler {
public:
    // Throws std::invalid_argument unless every scale is positive and the
    // initial point matches the scales in dimension.
    GenericRandomWalkSampler(LogDensity log_target, std::vector<double> scales,
                             std::vector<double> initial);
    std::size_t dimension() const override { return scales_.size(); }
    ChainState initial_state() const override { return {initial_, 0}; }
    void step(ChainState& state, UniformSource& u) const override;
    std::string target() const override { return ""; }
    std::uint64_t nan_rejects() const { return nan_rejects_.load(); }

private:
    LogDensity log_target_;
    std::vector<double> scales_;
    std::vector<double> initial_;
    mutable std::atomic<std::uint64_t> nan_rejects_{0};
};

}  // namespace mcstop
