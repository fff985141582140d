// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Non-linear Kesten recursion over a population of independent agents:
//
//     W' = W + alpha * W^gamma + S
//
// with alpha drawn per agent and step from the stream (seed, agent, step),
// savings S frozen at the agent's initial wealth, and one of three
// replacement rules for agents whose wealth drops to zero or below.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kesten/distributions.hpp"
#include "kesten/errors.hpp"
#include "kesten/inequality.hpp"
#include "kesten/parallel.hpp"
#include "kesten/rng.hpp"
#include "kesten/tailstats.hpp"

namespace kesten {

/// Wealth above this is reported as Overflow instead of drifting to infinity.
inline constexpr double kWealthCeiling = 1e300;

// ---------------------------------------------------------------------------
// Savings
// ---------------------------------------------------------------------------

/// Wealth-independent additive term: zero, or the logistic
/// S(w) = kappa1 / (1 + kappa2 * w^kappa3) with kappa1, kappa2 > 0 > kappa3.
class SavingsModel {
public:
    SavingsModel() = default;

    static SavingsModel zero() { return {}; }

    static SavingsModel logistic(double kappa1, double kappa2, double kappa3) {
        if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !(kappa3 < 0.0) || !std::isfinite(kappa1) ||
            !std::isfinite(kappa2) || !std::isfinite(kappa3)) {
            throw InvalidArgument("logistic savings needs kappa1 > 0, kappa2 > 0, kappa3 < 0");
        }
        SavingsModel m;
        m.logistic_ = true;
        m.kappa1_ = kappa1;
        m.kappa2_ = kappa2;
        m.kappa3_ = kappa3;
        return m;
    }

    bool is_zero() const noexcept { return !logistic_; }
    double kappa1() const noexcept { return kappa1_; }
    double kappa2() const noexcept { return kappa2_; }
    double kappa3() const noexcept { return kappa3_; }

    double operator()(double w) const {
        if (!logistic_) {
            return 0.0;
        }
        if (!(w > 0.0)) {
            throw InvalidArgument("savings are defined for positive wealth only");
        }
        // kappa2 * w^kappa3 evaluated in log space so w -> 0+ and w -> inf stay finite.
        const double log_term = std::log(kappa2_) + kappa3_ * std::log(w);
        if (log_term > 700.0) {
            return kappa1_ * std::exp(-log_term);
        }
        return kappa1_ / (1.0 + std::exp(log_term));
    }

private:
    bool logistic_ = false;
    double kappa1_ = 0.0;
    double kappa2_ = 0.0;
    double kappa3_ = 0.0;
};

inline double savings_eval(const SavingsModel& model, double w) { return model(w); }

/// Paper-calibrated logistic savings (UK 2016 deciles).
inline SavingsModel uk_savings() { return SavingsModel::logistic(1e6, 4.13e9, -1.308); }

// ---------------------------------------------------------------------------
// Crossover
// ---------------------------------------------------------------------------

/// Wealth alpha^(-1/(gamma-1)) at which one period's return equals wealth.
inline double crossover_scale(double alpha, double gamma) {
    if (gamma == 1.0) {
        throw GammaIsOne("crossover scale is undefined for gamma = 1");
    }
    if (!(alpha > 0.0) || !(gamma > 1.0)) {
        throw InvalidArgument("crossover scale needs alpha > 0 and gamma > 1");
    }
    return std::pow(alpha, -1.0 / (gamma - 1.0));
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Law of the return prefactor: premultiplier * nct(k, c, l, s), optionally
/// conditioned on being positive, or a forced constant.
struct AlphaLaw {
    NctParams nct = billionaire_nct();
    double premultiplier = 1.0;
    bool truncate_positive = false;
    std::optional<double> forced;

    double sample(RngStream& rng) const {
        if (forced) {
            return *forced;
        }
        for (;;) {
            const double a = premultiplier * sample_nct(nct, rng);
            if (!truncate_positive || a > 0.0) {
                return a;
            }
        }
    }
};

enum class Replacement { R1, R2, R3 };

struct ConstantInit {
    double w0 = 10000.0;
};
struct ShiftedExpInit {
    double floor = 5000.0;
    double mean = 5000.0;  // of the exponential part
};
struct ExpInit {
    double mean = 10000.0;
};
struct ParetoInit {
    ParetoParams params{5000.0, 2.0};
};
struct BootstrapInit {
    EmpiricalTail tail;
};

using InitialCondition = std::variant<ConstantInit, ShiftedExpInit, ExpInit, ParetoInit, BootstrapInit>;

struct SimulationConfig {
    double gamma = 1.075;
    AlphaLaw alpha;
    SavingsModel savings;
    Replacement replacement = Replacement::R1;
    InitialCondition initial = ConstantInit{};
    std::size_t n_agents = 100000;
    std::uint32_t horizon = 300;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
            throw InvalidArgument("gamma must be >= 1");
        }
        if (!(alpha.premultiplier > 0.0)) {
            throw InvalidArgument("alpha premultiplier must be positive");
        }
        alpha.nct.validate();
        if (n_agents < 1 || n_agents > std::numeric_limits<std::uint32_t>::max()) {
            throw InvalidArgument("agent count must be in [1, 2^32)");
        }
    }
};

// ---------------------------------------------------------------------------
// Population
// ---------------------------------------------------------------------------

struct Population {
    std::vector<double> wealth;
    std::vector<double> prev_wealth;
    std::vector<double> initial_wealth;
    std::vector<double> savings;  // frozen S(W0) per agent
    std::vector<std::uint64_t> bankruptcies;
    /// Agents that went bankrupt in the most recent step (cleared by the next step).
    std::vector<std::uint8_t> flagged;
    std::uint32_t step = 0;

    std::size_t size() const noexcept { return wealth.size(); }

    std::uint64_t total_bankruptcies() const noexcept {
        std::uint64_t total = 0;
        for (auto b : bankruptcies) {
            total += b;
        }
        return total;
    }

    std::size_t flagged_count() const noexcept {
        std::size_t total = 0;
        for (auto f : flagged) {
            total += f;
        }
        return total;
    }

    /// Build a population from given wealth, with savings evaluated at it.
    static Population from_wealth(std::vector<double> w, const SavingsModel& savings = SavingsModel::zero()) {
        Population pop;
        pop.wealth = std::move(w);
        pop.prev_wealth = pop.wealth;
        pop.initial_wealth = pop.wealth;
        pop.savings.resize(pop.wealth.size());
        for (std::size_t i = 0; i < pop.wealth.size(); ++i) {
            if (!(pop.wealth[i] > 0.0) || !std::isfinite(pop.wealth[i])) {
                throw InvalidArgument("initial wealth must be finite and positive");
            }
            pop.savings[i] = savings(pop.wealth[i]);
        }
        pop.bankruptcies.assign(pop.wealth.size(), 0);
        pop.flagged.assign(pop.wealth.size(), 0);
        return pop;
    }
};

/// Draw one agent's initial wealth (stream: agent i, step 0, Initial purpose).
inline double sample_initial_wealth(const InitialCondition& init, RngStream& rng) {
    return std::visit(
        [&rng](const auto& ic) -> double {
            using T = std::decay_t<decltype(ic)>;
            if constexpr (std::is_same_v<T, ConstantInit>) {
                return ic.w0;
            } else if constexpr (std::is_same_v<T, ShiftedExpInit>) {
                return ic.floor + sample_exponential(1.0 / ic.mean, rng);
            } else if constexpr (std::is_same_v<T, ExpInit>) {
                return sample_exponential(1.0 / ic.mean, rng);
            } else if constexpr (std::is_same_v<T, ParetoInit>) {
                return sample_pareto(ic.params, rng);
            } else {
                // Piecewise-constant inverse CDF: F(w_i) = 1 - exceedance_i.
                return percentile_wealth(ic.tail, 1.0 - rng.uniform_pos());
            }
        },
        init);
}

inline Population sample_initial(const SimulationConfig& config, unsigned threads = 1) {
    config.validate();
    if (const auto* boot = std::get_if<BootstrapInit>(&config.initial)) {
        if (boot->tail.empty()) {
            throw EmptyTail("bootstrap initial condition has no tail points");
        }
    }
    std::vector<double> w(config.n_agents);
    parallel_for(w.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RngStream rng(config.master_seed, static_cast<std::uint32_t>(i), 0, StreamPurpose::Initial);
            w[i] = sample_initial_wealth(config.initial, rng);
        }
    });
    return Population::from_wealth(std::move(w), config.savings);
}

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

/// One recursion step for every agent. Agents ending at W' <= 0 are flagged;
/// their wealth is left non-positive until apply_replacement.
inline void step(Population& pop, const SimulationConfig& config, unsigned threads = 1) {
    const std::uint32_t n = pop.step + 1;
    pop.prev_wealth = pop.wealth;
    parallel_for(pop.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RngStream rng(config.master_seed, static_cast<std::uint32_t>(i), n, StreamPurpose::Alpha);
            const double w = pop.prev_wealth[i];
            const double alpha = config.alpha.sample(rng);
            const double growth = config.gamma == 1.0 ? w : std::pow(w, config.gamma);
            const double next = w + alpha * growth + pop.savings[i];
            if (std::isnan(next) || next > kWealthCeiling) {
                throw OverflowError(i, n, next);
            }
            pop.wealth[i] = next;
            pop.flagged[i] = next <= 0.0 ? 1 : 0;
        }
    });
    pop.step = n;
}

/// Restore positive wealth for agents flagged by the last step.
///   R1: p * previous wealth, p ~ Uniform(0, 1]
///   R2: previous wealth
///   R3: post-step wealth of a uniformly chosen unflagged agent
inline void apply_replacement(Population& pop, Replacement mechanism, std::uint64_t master_seed) {
    std::vector<std::uint32_t> donors;
    if (mechanism == Replacement::R3) {
        donors.reserve(pop.size());
        for (std::size_t j = 0; j < pop.size(); ++j) {
            if (!pop.flagged[j]) {
                donors.push_back(static_cast<std::uint32_t>(j));
            }
        }
        if (donors.empty() && pop.flagged_count() > 0) {
            throw AllBankrupt(pop.step);
        }
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (!pop.flagged[i]) {
            continue;
        }
        switch (mechanism) {
            case Replacement::R1: {
                RngStream rng(master_seed, static_cast<std::uint32_t>(i), pop.step, StreamPurpose::Replacement);
                pop.wealth[i] = rng.uniform_pos() * pop.prev_wealth[i];
                break;
            }
            case Replacement::R2:
                pop.wealth[i] = pop.prev_wealth[i];
                break;
            case Replacement::R3: {
                RngStream rng(master_seed, static_cast<std::uint32_t>(i), pop.step, StreamPurpose::Donor);
                pop.wealth[i] = pop.wealth[donors[rng.below(donors.size())]];
                break;
            }
        }
        ++pop.bankruptcies[i];
    }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

struct StepSummary {
    std::uint32_t step = 0;
    double gini = 0.0;
    double top1 = 0.0;
    std::uint64_t bankruptcies = 0;      // cumulative
    std::uint64_t new_bankruptcies = 0;  // in this step
};

inline StepSummary summarize(const Population& pop) {
    const auto report = inequality_report(pop.wealth, 0.01);
    return {pop.step, report.gini, report.top_share, pop.total_bankruptcies(), pop.flagged_count()};
}

/// Default observation times for generic and bootstrap (realistic) runs.
inline std::vector<std::uint32_t> default_observation_times(const SimulationConfig& config) {
    if (std::holds_alternative<BootstrapInit>(config.initial)) {
        return {0, 2, 4, 6, 8, 10, 20, 50};
    }
    return {0, 10, 100, 200, 300};
}

struct RunOptions {
    std::vector<std::uint32_t> observation_times;  // empty: defaults for the config
    unsigned threads = 1;
    std::uint32_t summary_every = 1;  // 0 disables the per-step series
    /// Called after every completed step (after replacement), and once for n = 0.
    std::function<void(const Population&)> on_step;
    /// Called at each observation time with the population and its summary.
    std::function<void(const Population&, const StepSummary&)> on_observe;
};

struct RunResult {
    std::vector<StepSummary> series;
    std::vector<StepSummary> observations;
    Population final_population;
};

/// horizon steps of step + apply_replacement. Overflow and AllBankrupt
/// propagate with their step index.
inline RunResult run(const SimulationConfig& config, const RunOptions& options = {}) {
    config.validate();
    auto times = options.observation_times.empty() ? default_observation_times(config) : options.observation_times;
    std::sort(times.begin(), times.end());
    RunResult result;
    Population pop = sample_initial(config, options.threads);

    auto visit = [&] {
        const bool observe = std::binary_search(times.begin(), times.end(), pop.step);
        const bool record = options.summary_every > 0 && pop.step % options.summary_every == 0;
        if (observe || record) {
            const auto summary = summarize(pop);
            if (record) {
                result.series.push_back(summary);
            }
            if (observe) {
                result.observations.push_back(summary);
                if (options.on_observe) {
                    options.on_observe(pop, summary);
                }
            }
        }
        if (options.on_step) {
            options.on_step(pop);
        }
    };

    visit();
    for (std::uint32_t n = 0; n < config.horizon; ++n) {
        step(pop, config, options.threads);
        apply_replacement(pop, config.replacement, config.master_seed);
        visit();
    }
    result.final_population = std::move(pop);
    return result;
}

}  // namespace kesten
