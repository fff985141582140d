// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Numerical checks of the asymptotics of linear and non-linear Kesten
// recursions.
//
//   linear      W' = A W + B
//     E log|A| < 0: stationary, power-law tail with E|A|^beta = 1 (Kesten 1973)
//     E log|A| > 0: (log|W_n| - mu n) / (sqrt(n) nu) -> N(0, 1)
//
//   non-linear  W' = W + alpha W^gamma + S, gamma > 1, alpha > 0
//     X_n = log W_n satisfies X' = gamma X + B with
//     B = log(alpha + W^(1-gamma) + S W^(-gamma)), and X_n / gamma^n -> X_0 + D.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "kesten/distributions.hpp"
#include "kesten/errors.hpp"
#include "kesten/numeric.hpp"
#include "kesten/parallel.hpp"
#include "kesten/process.hpp"
#include "kesten/rng.hpp"
#include "kesten/tailstats.hpp"

namespace kesten::theory {

// ---------------------------------------------------------------------------
// Laws for the linear recursion
// ---------------------------------------------------------------------------

struct ConstantLaw {
    double value = 0.0;
};
/// exp(N(mean_log, var_log)).
struct LogNormalLaw {
    double mean_log = 0.0;
    double var_log = 1.0;
};
/// first with probability p_first, otherwise second.
struct TwoPointLaw {
    double first = 2.0;
    double p_first = 0.5;
    double second = 0.25;
};
/// 1 + alpha with alpha drawn from an AlphaLaw.
struct OnePlusAlphaLaw {
    AlphaLaw alpha;
};

using Law = std::variant<ConstantLaw, LogNormalLaw, TwoPointLaw, OnePlusAlphaLaw>;

inline double sample(const Law& law, RngStream& rng) {
    return std::visit(
        [&rng](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ConstantLaw>) {
                return l.value;
            } else if constexpr (std::is_same_v<T, LogNormalLaw>) {
                return std::exp(l.mean_log + std::sqrt(l.var_log) * rng.normal());
            } else if constexpr (std::is_same_v<T, TwoPointLaw>) {
                return rng.uniform() < l.p_first ? l.first : l.second;
            } else {
                return 1.0 + l.alpha.sample(rng);
            }
        },
        law);
}

struct LogMoments {
    double mu = 0.0;   // E log|A|
    double nu2 = 0.0;  // Var log|A|
};

/// Exact where the law allows it; Monte Carlo (fixed stream, 4e6 draws) otherwise.
inline LogMoments log_moments(const Law& law) {
    if (const auto* c = std::get_if<ConstantLaw>(&law)) {
        return {std::log(std::abs(c->value)), 0.0};
    }
    if (const auto* ln = std::get_if<LogNormalLaw>(&law)) {
        return {ln->mean_log, ln->var_log};
    }
    if (const auto* tp = std::get_if<TwoPointLaw>(&law)) {
        const double a = std::log(std::abs(tp->first));
        const double b = std::log(std::abs(tp->second));
        return {tp->p_first * a + (1.0 - tp->p_first) * b, tp->p_first * (1.0 - tp->p_first) * (a - b) * (a - b)};
    }
    constexpr std::size_t draws = 4'000'000;
    constexpr std::uint32_t per_stream = 1000;
    std::vector<double> logs;
    logs.reserve(draws);
    for (std::uint32_t s = 0; s < draws / per_stream; ++s) {
        RngStream rng(0x6b657374656eULL, s, 0, StreamPurpose::Generic);
        for (std::uint32_t j = 0; j < per_stream; ++j) {
            logs.push_back(std::log(std::abs(sample(law, rng))));
        }
    }
    const auto mv = numeric::mean_variance(logs);
    return {mv.mean, mv.variance};
}

struct LinearKestenSpec {
    Law multiplier = LogNormalLaw{0.05, 0.01};
    Law additive = ConstantLaw{0.0};
};

/// Final values W_n of independent linear Kesten trajectories. With B = 0
/// the recursion runs on log|W| and returns log|W_n| in `log_abs` without
/// any overflow; `value` then holds exp of it.
struct LinearTrajectories {
    std::vector<double> value;
    std::vector<double> log_abs;
};

inline LinearTrajectories simulate_linear_kesten(const LinearKestenSpec& spec, std::uint32_t n,
                                                 std::size_t trajectories, std::uint64_t seed, double w0 = 1.0,
                                                 unsigned threads = 1) {
    LinearTrajectories out;
    out.value.resize(trajectories);
    out.log_abs.resize(trajectories);
    const auto* zero_b = std::get_if<ConstantLaw>(&spec.additive);
    const bool log_domain = zero_b != nullptr && zero_b->value == 0.0;
    parallel_for(trajectories, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            double w = w0;
            double log_w = std::log(std::abs(w0));
            for (std::uint32_t k = 1; k <= n; ++k) {
                RngStream rng(seed, static_cast<std::uint32_t>(t), k, StreamPurpose::Generic);
                const double a = sample(spec.multiplier, rng);
                if (log_domain) {
                    log_w += std::log(std::abs(a));
                } else {
                    w = a * w + sample(spec.additive, rng);
                    if (!std::isfinite(w)) {
                        throw OverflowError(t, k, w);
                    }
                }
            }
            out.log_abs[t] = log_domain ? log_w : std::log(std::abs(w));
            out.value[t] = log_domain ? std::exp(log_w) : w;
        }
    });
    return out;
}

struct ClTCheck {
    std::vector<double> standardized;
    double ks_distance = 0.0;
    LogMoments moments;
};

/// Standardize log|W_n| by mu n and sqrt(n) nu across trajectories and
/// measure the KS distance to N(0, 1). Growth regime only (mu > 0, nu > 0).
inline ClTCheck linear_clt_check(const LinearKestenSpec& spec, std::uint32_t n, std::size_t trajectories,
                                 std::uint64_t seed, double w0 = 1.0, unsigned threads = 1) {
    ClTCheck check;
    check.moments = log_moments(spec.multiplier);
    if (!(check.moments.nu2 > 0.0)) {
        throw WrongRegime("Var log|A| = 0: the standardization is degenerate");
    }
    if (!(check.moments.mu > 0.0)) {
        throw WrongRegime("E log|A| <= 0: not the growth regime");
    }
    if (n == 0 || trajectories == 0) {
        throw InvalidArgument("CLT check needs n >= 1 and at least one trajectory");
    }
    const auto sim = simulate_linear_kesten(spec, n, trajectories, seed, w0, threads);
    const double scale = std::sqrt(static_cast<double>(n) * check.moments.nu2);
    check.standardized.reserve(trajectories);
    for (double lw : sim.log_abs) {
        check.standardized.push_back((lw - check.moments.mu * n) / scale);
    }
    check.ks_distance = ks_distance(check.standardized, [](double z) { return standard_normal_cdf(z); });
    return check;
}

struct TailExponent {
    double beta = 0.0;
    double std_error = 0.0;
    double mean_log = 0.0;
};

/// Root beta > 0 of E|A|^beta = 1, with E estimated from `draws` samples of A
/// and located by bisection. The standard error follows from the delta method.
inline TailExponent stationary_tail_exponent(const Law& law, std::uint64_t seed, std::size_t draws = 1'000'000,
                                             double beta_max = 64.0) {
    std::vector<double> logs;
    logs.reserve(draws);
    constexpr std::uint32_t per_stream = 1000;
    for (std::uint32_t s = 0; logs.size() < draws; ++s) {
        RngStream rng(seed, s, 0, StreamPurpose::Generic);
        for (std::uint32_t j = 0; j < per_stream && logs.size() < draws; ++j) {
            logs.push_back(std::log(std::abs(sample(law, rng))));
        }
    }
    TailExponent out;
    out.mean_log = numeric::mean_variance(logs).mean;
    if (!(out.mean_log < 0.0)) {
        throw WrongRegime("E log|A| >= 0: no stationary distribution");
    }
    auto moment = [&](double b) {
        numeric::CompensatedSum acc;
        for (double lg : logs) {
            acc += std::exp(b * lg);
        }
        return acc.value() / static_cast<double>(logs.size());
    };
    double lo = 1e-6;
    double hi = 0.0;
    for (double b = 0.125; b <= beta_max; b *= 2.0) {
        if (moment(b) > 1.0) {
            hi = b;
            break;
        }
        lo = b;
    }
    if (hi == 0.0) {
        throw NoRoot("E|A|^b stays below 1 on (0, " + std::to_string(beta_max) + "]");
    }
    out.beta = numeric::bisect([&](double b) { return moment(b) - 1.0; }, lo, hi, 1e-10);

    numeric::CompensatedSum sq;
    numeric::CompensatedSum slope;
    for (double lg : logs) {
        const double v = std::exp(out.beta * lg);
        sq += (v - 1.0) * (v - 1.0);
        slope += lg * v;
    }
    const double n = static_cast<double>(logs.size());
    const double se_moment = std::sqrt(sq.value() / (n - 1.0) / n);
    out.std_error = se_moment / std::abs(slope.value() / n);
    return out;
}

// ---------------------------------------------------------------------------
// Non-linear recursion
// ---------------------------------------------------------------------------

struct GrowthConstant {
    /// X_n / gamma^n at the final step; estimates X_0 + D = log(W_0 e^D).
    double scaled_log_wealth = 0.0;
    /// B_k gamma^(-k) for k = 1..n.
    std::vector<double> increments;
    /// X_n = log W_n at the final step.
    double log_wealth = 0.0;
    /// X_k / gamma^k for k = 0..n.
    std::vector<double> series;
    std::uint32_t depth = 0;
    bool converged = false;

    double log_w0_eD() const noexcept { return scaled_log_wealth; }
};

struct GrowthInput {
    double gamma = 1.075;
    double w0 = 1e4;
    double savings = 0.0;
    std::uint32_t steps = 500;
};

/// Log-domain iteration X' = gamma X + B with alpha_at(k) supplying alpha_k.
inline GrowthConstant nonlinear_growth_constant(const GrowthInput& in, const std::function<double(std::uint32_t)>& alpha_at) {
    if (!(in.gamma > 1.0)) {
        throw InvalidArgument("growth constant needs gamma > 1");
    }
    if (!(in.w0 > 0.0)) {
        throw InvalidArgument("growth constant needs W0 > 0");
    }
    GrowthConstant out;
    double x = std::log(in.w0);
    double scaled = x;
    out.series.push_back(scaled);
    double previous = scaled;
    for (std::uint32_t k = 1; k <= in.steps; ++k) {
        const double alpha = alpha_at(k);
        if (!(alpha > 0.0)) {
            throw InvalidArgument("growth constant needs positive alpha draws");
        }
        const double b = std::log(alpha + std::exp(-(in.gamma - 1.0) * x) + in.savings * std::exp(-in.gamma * x));
        x = in.gamma * x + b;
        const double inc = b * std::pow(in.gamma, -static_cast<double>(k));
        previous = scaled;
        // X_k gamma^-k directly: summing the increments loses digits when the
        // limit is small next to X_0. The sum takes over once X_k overflows.
        const double direct = x * std::pow(in.gamma, -static_cast<double>(k));
        scaled = std::isfinite(direct) ? direct : scaled + inc;
        out.increments.push_back(inc);
        out.series.push_back(scaled);
    }
    out.scaled_log_wealth = scaled;
    out.log_wealth = x;
    out.depth = in.steps;
    out.converged = in.steps > 0 && std::abs(scaled - previous) < 1e-9;
    return out;
}

/// Same, with alpha_k drawn from `law` on the stream (seed, trajectory, k).
inline GrowthConstant nonlinear_growth_constant(const GrowthInput& in, const AlphaLaw& law, std::uint64_t seed,
                                                std::uint32_t trajectory = 0) {
    if (!law.truncate_positive && !(law.forced && *law.forced > 0.0)) {
        throw InvalidArgument("growth constant needs an alpha law truncated to positive values");
    }
    return nonlinear_growth_constant(in, [&](std::uint32_t k) {
        RngStream rng(seed, trajectory, k, StreamPurpose::Alpha);
        return law.sample(rng);
    });
}

inline void write_growth_series_csv(std::ostream& os, const GrowthConstant& g) {
    os << "n,scaled_log_wealth\n";
    for (std::size_t k = 0; k < g.series.size(); ++k) {
        os << k << ',' << g.series[k] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Return band
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// One standard deviation around the mean return mu w^(gamma-1).
inline Interval ror_band(double mu, double sigma, double gamma, double w) {
    if (!(w > 0.0)) {
        throw InvalidArgument("return band needs positive wealth");
    }
    const double scale = std::pow(w, gamma - 1.0);
    return {(mu - sigma) * scale, (mu + sigma) * scale};
}

}  // namespace kesten::theory
