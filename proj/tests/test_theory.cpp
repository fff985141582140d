// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "kesten/process.hpp"
#include "kesten/tailstats.hpp"
#include "kesten/theory.hpp"

using namespace kesten;
using namespace kesten::theory;

namespace {

// Root of (2^b + 4^-b) / 2 = 1 on (0, 4) by plain bisection.
double two_point_beta_oracle() {
    double lo = 0.01;
    double hi = 4.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f = 0.5 * (std::pow(2.0, mid) + std::pow(4.0, -mid)) - 1.0;
        (f > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

AlphaLaw positive_billionaire() {
    AlphaLaw law;
    law.truncate_positive = true;
    return law;
}

}  // namespace

TEST(LinearClt, ConstantMultiplierIsDegenerate) {
    LinearKestenSpec spec{ConstantLaw{1.05}, ConstantLaw{0.0}};
    EXPECT_THROW(linear_clt_check(spec, 10, 10, 1), WrongRegime);
    const auto sim = simulate_linear_kesten(spec, 10, 3, 1, 2.0);
    for (double v : sim.value) {
        EXPECT_NEAR(v, 2.0 * std::pow(1.05, 10), 1e-12);
    }
}

TEST(LinearClt, ShrinkingRegimeRejected) {
    LinearKestenSpec spec{LogNormalLaw{-0.05, 0.01}, ConstantLaw{0.0}};
    EXPECT_THROW(linear_clt_check(spec, 10, 10, 1), WrongRegime);
}

TEST(LinearClt, LognormalMultiplier) {
    LinearKestenSpec spec{LogNormalLaw{0.05, 0.01}, ConstantLaw{0.0}};
    const auto check = linear_clt_check(spec, 400, 10'000, 11, 1.0, 4);
    EXPECT_LT(check.ks_distance, 0.02);
    EXPECT_EQ(check.standardized.size(), 10'000u);
    EXPECT_DOUBLE_EQ(check.moments.mu, 0.05);
}

TEST(LinearClt, BillionaireReturns) {
    AlphaLaw alpha;
    alpha.premultiplier = 2.5;
    LinearKestenSpec spec{OnePlusAlphaLaw{alpha}, ConstantLaw{0.0}};
    const auto check = linear_clt_check(spec, 400, 10'000, 12, 1.0, 4);
    EXPECT_GT(check.moments.mu, 0.0);
    EXPECT_LT(check.ks_distance, 0.05);
}

TEST(LinearClt, ThreadCountDoesNotChangeResult) {
    LinearKestenSpec spec{LogNormalLaw{0.05, 0.01}, ConstantLaw{0.5}};
    const auto a = simulate_linear_kesten(spec, 50, 1000, 3, 1.0, 1);
    const auto b = simulate_linear_kesten(spec, 50, 1000, 3, 1.0, 8);
    EXPECT_EQ(a.value, b.value);
}

TEST(StationaryTail, TwoPointLawMatchesOracle) {
    const double oracle = two_point_beta_oracle();
    EXPECT_NEAR(oracle, 0.695, 0.001);
    const auto t = stationary_tail_exponent(TwoPointLaw{}, 21);
    EXPECT_NEAR(t.beta, oracle, 0.01);
    EXPECT_NEAR(t.beta, 0.695, 0.01);
    EXPECT_LT(t.std_error, 0.01);
    EXPECT_LT(t.mean_log, 0.0);
}

TEST(StationaryTail, Errors) {
    EXPECT_THROW(stationary_tail_exponent(ConstantLaw{0.5}, 1, 1000), NoRoot);
    EXPECT_THROW(stationary_tail_exponent(ConstantLaw{2.0}, 1, 1000), WrongRegime);
    EXPECT_THROW(stationary_tail_exponent(LogNormalLaw{0.1, 0.01}, 1, 1000), WrongRegime);
}

TEST(StationaryTail, LognormalClosedForm) {
    // E A^b = exp(b m + b^2 v / 2) = 1 at b = -2m / v.
    const auto t = stationary_tail_exponent(LogNormalLaw{-0.1, 0.1}, 5);
    EXPECT_NEAR(t.beta, 2.0, 0.05);
}

TEST(StationaryTail, SimulatedProcessHasPredictedTail) {
    LinearKestenSpec spec{TwoPointLaw{}, ConstantLaw{1.0}};
    const std::size_t n = 400'000;
    const auto sim = simulate_linear_kesten(spec, 200, n, 9, 1.0, 8);
    const auto tail = empirical_tail(sim.value);
    const auto fit = fit_power_law(tail, FitWindow{10.0, percentile_wealth(tail, 100.0 / n)});
    EXPECT_NEAR(fit.beta, two_point_beta_oracle(), 0.1);
}

TEST(GrowthConstant, ConvergesForConstantAlpha) {
    GrowthInput in{1.075, 1e4, 0.0, 500};
    const auto a = nonlinear_growth_constant(in, [](std::uint32_t) { return 0.01; });
    in.steps = 1000;
    const auto b = nonlinear_growth_constant(in, [](std::uint32_t) { return 0.01; });
    EXPECT_LT(std::abs(a.scaled_log_wealth - b.scaled_log_wealth), 1e-6);
    EXPECT_TRUE(b.converged);
    EXPECT_EQ(b.depth, 1000u);
    EXPECT_EQ(b.series.size(), 1001u);
    EXPECT_EQ(b.increments.size(), 1000u);
    EXPECT_NEAR(b.series.front(), std::log(1e4), 1e-15);
}

TEST(GrowthConstant, GeometricTailBound) {
    const double gamma = 1.2;
    const auto g = nonlinear_growth_constant(GrowthInput{gamma, 50.0, 0.0, 400}, [](std::uint32_t) { return 0.3; });
    double sup_b = 0.0;
    for (std::size_t k = 0; k < g.increments.size(); ++k) {
        sup_b = std::max(sup_b, std::abs(g.increments[k]) * std::pow(gamma, static_cast<double>(k + 1)));
    }
    const double limit = g.series.back();
    for (std::size_t n = 0; n + 1 < g.series.size(); ++n) {
        const double bound = sup_b * std::pow(gamma, -static_cast<double>(n)) / (gamma - 1.0);
        EXPECT_LE(std::abs(limit - g.series[n]), bound + 1e-12) << "n = " << n;
    }
}

TEST(GrowthConstant, IsCauchy) {
    // |X_2n / gamma^2n - X_n / gamma^n| ~ sup|B| gamma^-n (1 - gamma^-n) / (gamma - 1),
    // which decreases once gamma^n > 2.
    const double gamma = 1.075;
    const auto g = nonlinear_growth_constant(GrowthInput{gamma, 1e4, 500.0, 800}, [](std::uint32_t) { return 0.02; });
    const auto first = static_cast<std::size_t>(std::ceil(std::log(4.0) / std::log(gamma)));
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t n = first; n <= 400; ++n) {
        const double d = std::abs(g.series[2 * n] - g.series[n]);
        if (previous > 1e-14) {
            EXPECT_LT(d, previous) << "n = " << n;
        }
        previous = d;
    }
    EXPECT_LT(previous, 1e-9);
}

TEST(GrowthConstant, NotErgodic) {
    const auto law = positive_billionaire();
    const auto a = nonlinear_growth_constant(GrowthInput{1.075, 1e4, 0.0, 600}, law, 17, 0);
    const auto b = nonlinear_growth_constant(GrowthInput{1.075, 2e4, 0.0, 600}, law, 17, 0);
    EXPECT_TRUE(a.converged);
    EXPECT_TRUE(b.converged);
    EXPECT_GT(b.log_w0_eD() - a.log_w0_eD(), 0.0);
    for (std::size_t k = 1; k <= 3; ++k) {
        const auto c = nonlinear_growth_constant(GrowthInput{1.075, 1e4, 0.0, 600}, law, 17, static_cast<std::uint32_t>(k));
        EXPECT_NE(c.log_w0_eD(), a.log_w0_eD());
    }
}

TEST(GrowthConstant, LogDomainMatchesWealthDomain) {
    const double gamma = 1.075;
    const double s = 800.0;
    const auto law = positive_billionaire();
    std::vector<double> alpha;
    for (std::uint32_t k = 1; k <= 200; ++k) {
        RngStream rng(23, 0, k, StreamPurpose::Alpha);
        alpha.push_back(law.sample(rng));
    }
    const auto g = nonlinear_growth_constant(GrowthInput{gamma, 3e4, s, 200},
                                             [&](std::uint32_t k) { return alpha[k - 1]; });
    double w = 3e4;
    std::size_t compared = 0;
    for (std::uint32_t k = 1; k <= 200; ++k) {
        w = w + alpha[k - 1] * std::pow(w, gamma) + s;
        if (!std::isfinite(w) || w > 1e300) {
            break;
        }
        const double x = g.series[k] * std::pow(gamma, static_cast<double>(k));
        EXPECT_NEAR(x / std::log(w), 1.0, 1e-12) << "k = " << k;
        ++compared;
    }
    EXPECT_GT(compared, 20u);
    const auto last = nonlinear_growth_constant(GrowthInput{gamma, 3e4, s, static_cast<std::uint32_t>(compared)},
                                                [&](std::uint32_t k) { return alpha[k - 1]; });
    double wf = 3e4;
    for (std::size_t k = 0; k < compared; ++k) {
        wf = wf + alpha[k] * std::pow(wf, gamma) + s;
    }
    EXPECT_NEAR(last.log_wealth / std::log(wf), 1.0, 1e-12);
}

TEST(GrowthConstant, LawOverloadMatchesExplicitDraws) {
    const auto law = positive_billionaire();
    const GrowthInput in{1.075, 1e4, 0.0, 100};
    const auto a = nonlinear_growth_constant(in, law, 5, 2);
    const auto b = nonlinear_growth_constant(in, [&](std::uint32_t k) {
        RngStream rng(5, 2, k, StreamPurpose::Alpha);
        return law.sample(rng);
    });
    EXPECT_EQ(a.series, b.series);
}

TEST(GrowthConstant, Errors) {
    EXPECT_THROW(nonlinear_growth_constant(GrowthInput{1.0, 1e4, 0.0, 10}, [](std::uint32_t) { return 0.1; }),
                 InvalidArgument);
    EXPECT_THROW(nonlinear_growth_constant(GrowthInput{1.1, 0.0, 0.0, 10}, [](std::uint32_t) { return 0.1; }),
                 InvalidArgument);
    EXPECT_THROW(nonlinear_growth_constant(GrowthInput{1.1, 1.0, 0.0, 10}, AlphaLaw{}, 1), InvalidArgument);
    AlphaLaw forced;
    forced.forced = 0.05;
    EXPECT_NO_THROW(nonlinear_growth_constant(GrowthInput{1.1, 1.0, 0.0, 10}, forced, 1));
}

TEST(GrowthConstant, SeriesCsv) {
    const auto g = nonlinear_growth_constant(GrowthInput{1.1, 10.0, 0.0, 2}, [](std::uint32_t) { return 0.1; });
    std::ostringstream os;
    write_growth_series_csv(os, g);
    const auto text = os.str();
    EXPECT_EQ(text.rfind("n,scaled_log_wealth\n0,", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Monopoly, RichestShareGrows) {
    for (double gamma : {1.0, 1.075}) {
        SimulationConfig c;
        c.gamma = gamma;
        c.alpha.premultiplier = gamma == 1.0 ? 2.5 : 1.0;
        c.n_agents = 1000;
        c.horizon = 300;
        c.master_seed = 31;
        std::vector<double> share;
        RunOptions opt;
        opt.observation_times = {10, 300};
        opt.summary_every = 0;
        opt.on_observe = [&](const Population& pop, const StepSummary&) {
            const double total = std::accumulate(pop.wealth.begin(), pop.wealth.end(), 0.0);
            share.push_back(*std::max_element(pop.wealth.begin(), pop.wealth.end()) / total);
        };
        run(c, opt);
        ASSERT_EQ(share.size(), 2u);
        EXPECT_GT(share[1], share[0]) << "gamma = " << gamma;
    }
}
