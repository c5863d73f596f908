#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mcstop/core.hpp"
#include "mcstop/mcse.hpp"
#include "mcstop/quantile.hpp"
#include "mcstop/samplers.hpp"
#include "test_helpers.hpp"

using namespace mcstop;
using testutil::ForcedUniforms;

namespace {

// Inverts draw_exponential(mean 2) so a forced uniform produces proposal y.
double uniform_for_exp_proposal(double y) { return -std::expm1(-y / 2.0); }

std::vector<double> run_chain(const Sampler& sampler, std::size_t n, std::uint64_t seed,
                              std::uint64_t stream, std::size_t coord = 0) {
    RngStream rng(seed, stream);
    ChainState state = sampler.initial_state();
    std::vector<double> out;
    out.reserve(n);
    out.push_back(state.coordinates[coord]);
    while (out.size() < n) {
        sampler.step(state, rng);
        out.push_back(state.coordinates[coord]);
    }
    return out;
}

double bm_mcse(const std::vector<double>& trace) {
    return std::sqrt(bm_variance(trace) / static_cast<double>(trace.size()));
}

}  // namespace

TEST_CASE("independence Metropolis accept probability is exp((x - y)/2)") {
    // x = 1, y = 3: accept iff u < e^{-1} = 0.36788
    {
        ForcedUniforms u{uniform_for_exp_proposal(3.0), 0.367};
        const auto next = indep_metropolis_exp_step({{1.0}, 0}, u);
        CHECK(next.coordinates[0] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(next.iteration == 1);
        CHECK(u.exhausted());
    }
    {
        ForcedUniforms u{uniform_for_exp_proposal(3.0), 0.369};
        const auto next = indep_metropolis_exp_step({{1.0}, 0}, u);
        CHECK(next.coordinates[0] == 1.0);  // rejected
    }
    // downhill in y is always accepted: x = 3, y = 1 has ratio e^{+1}
    {
        ForcedUniforms u{uniform_for_exp_proposal(1.0), 0.9999999};
        const auto next = indep_metropolis_exp_step({{3.0}, 0}, u);
        CHECK(next.coordinates[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    // y = x: ratio 1, accepted at any uniform
    {
        ForcedUniforms u{uniform_for_exp_proposal(1.0), 0.9999999};
        const auto next = indep_metropolis_exp_step({{1.0}, 0}, u);
        CHECK(next.coordinates[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("exp chain long-run moments") {
    ExpIndependenceSampler sampler;
    const auto trace = run_chain(sampler, 200000, 101, 1);
    const auto [mean, sd] = mean_estimate(trace);
    CHECK(std::fabs(mean - 1.0) < 3.0 * bm_mcse(trace));
    CHECK(sd == doctest::Approx(1.0).epsilon(0.05));  // Var[Exp(1)] = 1

    const auto med = quantile_variance(trace, 0.5);
    CHECK(std::fabs(med.xi_hat - 0.6931472) <
          3.0 * std::sqrt(med.gamma2_hat / static_cast<double>(trace.size())));
}

TEST_CASE("mixture random walk long-run moments") {
    const MixtureParams params;
    const auto means = mixture_marginal_means(params);
    const auto vars = mixture_marginal_variances(params);
    CHECK(means[0] == doctest::Approx(2.125));
    CHECK(means[1] == doctest::Approx(21.25));

    for (ProposalKind kind : {ProposalKind::Uniform, ProposalKind::Normal}) {
        CAPTURE(static_cast<int>(kind));
        MixtureRandomWalkSampler sampler(kind);
        for (std::size_t coord : {0u, 1u}) {
            const auto trace = run_chain(sampler, 300000, 202, 1 + coord, coord);
            const auto [mean, sd] = mean_estimate(trace);
            CHECK(std::fabs(mean - means[coord]) < 3.5 * bm_mcse(trace));
            CHECK(sd * sd == doctest::Approx(vars[coord]).epsilon(0.10));
        }
    }
}

TEST_CASE("acceptance ratio ignores the current point when proposal equals it") {
    // forcing a zero-length move: log ratio is 0, any uniform accepts
    const MixtureParams params;
    ForcedUniforms u{0.5, 0.9999999, 0.5, 0.9999999};
    const ChainState state{{2.0, 20.0}, 0};
    const auto next = rw_metropolis_mixture_step(state, u, ProposalKind::Uniform, params);
    CHECK(next.coordinates[0] == 2.0);
    CHECK(next.coordinates[1] == 20.0);
    CHECK(next.iteration == 1);
}

TEST_CASE("Gibbs conditional weights") {
    const MixtureParams params;

    SUBCASE("matches the value from direct substitution at x2 = 10") {
        // (1 + 3*(5/7)*exp(-(1/2)((15/7)^2)))^{-1}, cross-checked below
        CHECK(gibbs_weight_x1_given_x2(10.0, params) ==
              doctest::Approx(0.822558454418).epsilon(1e-10));
    }

    SUBCASE("equals the Bayes posterior component probability") {
        auto normal_pdf = [](double x, double mu, double s) {
            const double z = (x - mu) / s;
            return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * M_PI));
        };
        for (double x2 = -5.0; x2 <= 55.0; x2 += 0.7) {
            const double num = params.p * normal_pdf(x2, params.mu12, params.sigma12);
            const double den =
                num + (1.0 - params.p) * normal_pdf(x2, params.mu22, params.sigma22);
            CHECK(gibbs_weight_x1_given_x2(x2, params) == doctest::Approx(num / den).epsilon(1e-12));
        }
        for (double x1 = -2.0; x1 <= 6.0; x1 += 0.11) {
            const double num = params.p * normal_pdf(x1, params.mu11, params.sigma11);
            const double den =
                num + (1.0 - params.p) * normal_pdf(x1, params.mu21, params.sigma21);
            CHECK(gibbs_weight_x2_given_x1(x1, params) == doctest::Approx(num / den).epsilon(1e-12));
        }
    }

    SUBCASE("stays inside (0, 1) even far out in the tails") {
        for (double x : {-1e6, -1e3, 0.0, 1e3, 1e6}) {
            const double w1 = gibbs_weight_x1_given_x2(x, params);
            const double w2 = gibbs_weight_x2_given_x1(x, params);
            CHECK(w1 > 0.0);
            CHECK(w1 < 1.0);
            CHECK(w2 > 0.0);
            CHECK(w2 < 1.0);
        }
    }

    SUBCASE("symmetric degenerate case gives 1/2") {
        MixtureParams sym;
        sym.p = 0.5;
        sym.mu21 = sym.mu11;
        sym.sigma21 = sym.sigma11;
        for (double x1 = -4.0; x1 <= 4.0; x1 += 0.5) {
            CHECK(gibbs_weight_x2_given_x1(x1, sym) == doctest::Approx(0.5).epsilon(1e-14));
        }
    }
}

TEST_CASE("Gibbs chain long-run moments") {
    MixtureGibbsSampler sampler;
    const auto means = mixture_marginal_means(sampler.params());
    const auto vars = mixture_marginal_variances(sampler.params());
    for (std::size_t coord : {0u, 1u}) {
        const auto trace = run_chain(sampler, 200000, 303, 1, coord);
        const auto [mean, sd] = mean_estimate(trace);
        CHECK(std::fabs(mean - means[coord]) < 3.5 * bm_mcse(trace));
        CHECK(sd * sd == doctest::Approx(vars[coord]).epsilon(0.05));
    }
}

TEST_CASE("generic random walk") {
    SUBCASE("constant log target accepts every proposal") {
        GenericRandomWalkSampler sampler([](std::span<const double>) { return 0.0; }, {1.0},
                                         {0.0});
        RngStream rng(404, 1);
        ChainState state = sampler.initial_state();
        double prev = state.coordinates[0];
        for (int i = 0; i < 200; ++i) {
            sampler.step(state, rng);
            CHECK(state.coordinates[0] != prev);
            prev = state.coordinates[0];
        }
        CHECK(sampler.nan_rejects() == 0);
    }

    SUBCASE("recovers a standard normal target") {
        GenericRandomWalkSampler sampler(
            [](std::span<const double> x) { return -0.5 * x[0] * x[0]; }, {2.4}, {0.0});
        const auto trace = run_chain(sampler, 200000, 405, 1);
        const auto [mean, sd] = mean_estimate(trace);
        CHECK(std::fabs(mean) < 3.5 * bm_mcse(trace));
        CHECK(sd == doctest::Approx(1.0).epsilon(0.03));
    }

    SUBCASE("NaN log densities are rejected and counted") {
        GenericRandomWalkSampler sampler(
            [](std::span<const double> x) {
                return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
            },
            {1.0}, {0.0});
        RngStream rng(406, 1);
        ChainState state = sampler.initial_state();
        for (int i = 0; i < 500; ++i) sampler.step(state, rng);
        CHECK(state.coordinates[0] <= 0.5);
        CHECK(sampler.nan_rejects() > 0);
    }

    SUBCASE("acceptance ratio cancels any unnormalized-density constant") {
        auto base = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };
        auto shifted = [](std::span<const double> x) { return -0.5 * x[0] * x[0] + 123.456; };
        GenericRandomWalkSampler a(base, {1.7}, {0.3});
        GenericRandomWalkSampler b(shifted, {1.7}, {0.3});
        const auto ta = run_chain(a, 5000, 407, 1);
        const auto tb = run_chain(b, 5000, 407, 1);
        CHECK(ta == tb);
    }

    SUBCASE("invalid construction") {
        auto flat = [](std::span<const double>) { return 0.0; };
        CHECK_THROWS_AS(GenericRandomWalkSampler(flat, {0.0}, {0.0}), std::invalid_argument);
        CHECK_THROWS_AS(GenericRandomWalkSampler(flat, {-1.0}, {0.0}), std::invalid_argument);
        CHECK_THROWS_AS(GenericRandomWalkSampler(flat, {1.0, 1.0}, {0.0}), std::invalid_argument);
        CHECK_THROWS_AS(GenericRandomWalkSampler(flat, {}, {}), std::invalid_argument);
    }
}

TEST_CASE("mixture marginal truths") {
    const MixtureParams params;

    SUBCASE("single-component reduction matches the normal quantile") {
        MixtureParams single;
        single.p = 1.0;
        for (double q : {0.1, 0.5, 0.9}) {
            const double expect = single.mu11 + single.sigma11 * normal_quantile(q);
            CHECK(mixture_marginal_quantile(single, 0, q) ==
                  doctest::Approx(expect).epsilon(1e-8));
        }
    }

    SUBCASE("bisection agrees with brute-force iid sampling") {
        RngStream rng(505, 1);
        const std::size_t n = 10000000;
        std::vector<double> draws(n);
        for (auto& d : draws) {
            const bool first = rng.next() < params.p;
            const double z = draw_normal(rng);
            d = first ? params.mu12 + params.sigma12 * z : params.mu22 + params.sigma22 * z;
        }
        const double mc = testutil::oracle_empirical_quantile(std::move(draws), 0.5);
        const double exact = mixture_marginal_quantile(params, 1, 0.5);
        CHECK(std::fabs(exact - mc) < 0.02);  // 4+ standard errors at n = 1e7
    }

    SUBCASE("quantiles are monotone and bracket the component means") {
        CHECK(mixture_marginal_quantile(params, 0, 0.1) <
              mixture_marginal_quantile(params, 0, 0.9));
        CHECK(mixture_marginal_quantile(params, 1, 0.05) > params.mu12 - 4.0 * params.sigma12);
        CHECK(mixture_marginal_quantile(params, 1, 0.95) < params.mu22 + 4.0 * params.sigma22);
    }
}

TEST_CASE("identical streams give identical trajectories") {
    const MixtureParams params;
    ExpIndependenceSampler exp_sampler;
    MixtureRandomWalkSampler rw_u(ProposalKind::Uniform, params);
    MixtureRandomWalkSampler rw_n(ProposalKind::Normal, params);
    MixtureGibbsSampler gibbs(params);
    IidNormalSampler iid;
    const std::vector<const Sampler*> samplers{&exp_sampler, &rw_u, &rw_n, &gibbs, &iid};
    for (const Sampler* s : samplers) {
        for (std::size_t coord = 0; coord < s->dimension(); ++coord) {
            const auto a = run_chain(*s, 2000, 606, 7, coord);
            const auto b = run_chain(*s, 2000, 606, 7, coord);
            CHECK(a == b);
        }
    }
}
