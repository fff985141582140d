// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Shifted/scaled noncentral t (the law of the return prefactor) plus the
// Pareto and exponential laws used for initial wealth.
//
// nct(k, c, l, s) is the law of s * (Z + c) / sqrt(V / k) + l with Z standard
// normal and V chi-square(k). There is no elementary closed form for the
// density; it is evaluated as a one-dimensional mixture integral over
// w = sqrt(V / k).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "kesten/errors.hpp"
#include "kesten/numeric.hpp"
#include "kesten/rng.hpp"

namespace kesten {

struct NctParams {
    double k = 1.0;  // degrees of freedom
    double c = 0.0;  // centrality
    double l = 0.0;  // shift
    double s = 1.0;  // scale

    NctParams() = default;
    NctParams(double dof, double centrality, double shift, double scale)
        : k(dof), c(centrality), l(shift), s(scale) {
        validate();
    }

    void validate() const {
        if (!(std::isfinite(k) && std::isfinite(c) && std::isfinite(l) && std::isfinite(s))) {
            throw InvalidArgument("nct parameters must be finite");
        }
        if (!(k > 0.0) || !(s > 0.0)) {
            throw InvalidArgument("nct requires k > 0 and s > 0");
        }
    }

    friend bool operator==(const NctParams&, const NctParams&) = default;
};

/// Parameters fitted to individual billionaire returns for gamma = 1.075.
inline NctParams billionaire_nct() { return {2.008, 0.941, -0.00156, 0.0112}; }

struct ParetoParams {
    double x_m = 1.0;
    double beta = 1.0;

    ParetoParams() = default;
    ParetoParams(double cutoff, double exponent) : x_m(cutoff), beta(exponent) {
        if (!(x_m > 0.0) || !(beta > 0.0) || !std::isfinite(x_m) || !std::isfinite(beta)) {
            throw InvalidArgument("Pareto requires x_m > 0 and beta > 0");
        }
    }
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

inline double sample_nct(const NctParams& p, RngStream& rng) {
    const double z = rng.normal();
    const double v = rng.chi_square(p.k);
    return p.s * (z + p.c) / std::sqrt(v / p.k) + p.l;
}

/// Inverse transform: P(X > x) = (x_m / x)^beta for x >= x_m.
inline double sample_pareto(const ParetoParams& p, RngStream& rng) {
    return p.x_m * std::pow(rng.uniform_pos(), -1.0 / p.beta);
}

/// Exponential with the given rate (mean 1 / rate).
inline double sample_exponential(double rate, RngStream& rng) {
    if (!(rate > 0.0)) {
        throw InvalidArgument("exponential rate must be positive");
    }
    return -std::log(rng.uniform_pos()) / rate;
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// E[s U + l]; finite only for k > 1.
inline double nct_mean(const NctParams& p) {
    if (!(p.k > 1.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double log_ratio = std::lgamma(0.5 * (p.k - 1.0)) - std::lgamma(0.5 * p.k);
    return p.l + p.s * p.c * std::sqrt(0.5 * p.k) * std::exp(log_ratio);
}

/// Var[s U + l]; finite only for k > 2.
inline double nct_variance(const NctParams& p) {
    if (!(p.k > 2.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double mean_u = (nct_mean(p) - p.l) / p.s;
    return p.s * p.s * (p.k * (1.0 + p.c * p.c) / (p.k - 2.0) - mean_u * mean_u);
}

// ---------------------------------------------------------------------------
// Density and distribution function
// ---------------------------------------------------------------------------

namespace detail {

/// Integration layout over w = sqrt(V / k) for the standardized variable u.
struct NctMixture {
    double k;
    double c;
    double log_norm;  // log of the w-density normaliser
    double w_hi;
    double w_mode;
    double w_spread;

    NctMixture(double dof, double centrality) : k(dof), c(centrality) {
        log_norm = std::log(2.0 * k) + 0.5 * (k - 2.0) * std::log(k) - 0.5 * k * std::numbers::ln2 -
                   std::lgamma(0.5 * k);
        const double v_hi = k + 12.0 * std::sqrt(2.0 * k) + 100.0;
        w_hi = std::sqrt(v_hi / k);
        w_mode = k > 1.0 ? std::sqrt((k - 1.0) / k) : 0.0;
        w_spread = 1.0 / std::sqrt(2.0 * k);
    }

    /// log density of w: V = k w^2 with V ~ chi-square(k).
    double log_w_density(double w) const noexcept {
        return log_norm + (k - 1.0) * std::log(w) - 0.5 * k * w * w;
    }

    std::vector<double> breaks(double u) const {
        std::vector<double> b{0.0, w_hi};
        auto add = [&](double w) {
            if (w > 0.0 && w < w_hi) {
                b.push_back(w);
            }
        };
        for (double m : {-3.0, -1.0, 0.0, 1.0, 3.0, 6.0}) {
            add(w_mode + m * w_spread);
        }
        const double au = std::abs(u);
        if (au > 1e-12) {
            const double center = c / u;
            for (double m : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) {
                add(center + m / au);
            }
            for (double m : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
                add(m / au);
            }
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    template <class F>
    double integrate(F&& f, double u) const {
        const auto b = breaks(u);
        auto result = numeric::integrate(f, b, 1e-10);
        if (result.value < 0.1 && result.value > 0.0) {
            // Tails: tighten to a relative tolerance.
            result = numeric::integrate(f, b, std::max(1e-9 * result.value, 1e-300), 2000);
        }
        return result.value;
    }

    double density(double u) const {
        auto integrand = [&](double w) {
            if (w <= 0.0) {
                return 0.0;
            }
            const double z = u * w - c;
            return w * std::exp(log_w_density(w) - 0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        };
        return std::max(0.0, integrate(integrand, u));
    }

    double cdf(double u) const {
        auto integrand = [&](double w) {
            if (w <= 0.0) {
                return 0.0;
            }
            const double z = u * w - c;
            return 0.5 * std::erfc(-z / std::numbers::sqrt2) * std::exp(log_w_density(w));
        };
        return std::clamp(integrate(integrand, u), 0.0, 1.0);
    }
};

}  // namespace detail

/// Density of nct(k, c, l, s) at x.
inline double nct_pdf(const NctParams& p, double x) {
    const detail::NctMixture mix(p.k, p.c);
    return mix.density((x - p.l) / p.s) / p.s;
}

/// P(X <= x) for X ~ nct(k, c, l, s).
inline double nct_cdf(const NctParams& p, double x) {
    const detail::NctMixture mix(p.k, p.c);
    return mix.cdf((x - p.l) / p.s);
}

// ---------------------------------------------------------------------------
// Maximum likelihood
// ---------------------------------------------------------------------------

struct NctFitOptions {
    double f_tol = 1e-8;             // on the mean log-likelihood per observation
    std::size_t max_evaluations = 3000;  // per start
    std::size_t exact_below = 2000;  // sample sizes up to this use exact per-point densities
    double grid_step = 0.04;         // spacing of the asinh(u) grid for larger samples
};

struct NctFit {
    NctParams params;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    std::vector<NctParams> starts;
    std::vector<double> start_log_likelihoods;
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

/// Sample log-likelihood under nct. Small samples are evaluated point by
/// point. Large samples are sorted once; log-density is then evaluated on an
/// asinh-spaced grid of the standardized variable and interpolated linearly,
/// with per-interval counts and first moments taken from prefix sums.
class NctLogLikelihood {
public:
    NctLogLikelihood(std::span<const double> data, const NctFitOptions& options)
        : sorted_(data.begin(), data.end()), options_(options) {
        std::sort(sorted_.begin(), sorted_.end());
        if (sorted_.size() > options_.exact_below) {
            prefix_.resize(sorted_.size() + 1, 0.0L);
            for (std::size_t i = 0; i < sorted_.size(); ++i) {
                prefix_[i + 1] = prefix_[i] + static_cast<long double>(sorted_[i]);
            }
        }
    }

    std::size_t size() const noexcept { return sorted_.size(); }
    const std::vector<double>& sorted() const noexcept { return sorted_; }

    double operator()(const NctParams& p) const {
        const NctMixture mix(p.k, p.c);
        auto log_density = [&](double x) {
            const double f = mix.density((x - p.l) / p.s) / p.s;
            return f > 0.0 ? std::log(f) : -745.0;
        };
        if (prefix_.empty()) {
            numeric::CompensatedSum total;
            for (double x : sorted_) {
                total += log_density(x);
            }
            return total.value();
        }

        const double t_lo = std::asinh((sorted_.front() - p.l) / p.s);
        const double t_hi = std::asinh((sorted_.back() - p.l) / p.s);
        const auto cells = static_cast<std::size_t>(std::ceil((t_hi - t_lo) / options_.grid_step));
        const std::size_t count = std::max<std::size_t>(cells, 1);
        const double dt = (t_hi - t_lo) / static_cast<double>(count);

        std::vector<double> nodes(count + 1);
        std::vector<double> values(count + 1);
        for (std::size_t j = 0; j <= count; ++j) {
            const double t = j == count ? t_hi : t_lo + dt * static_cast<double>(j);
            nodes[j] = j == 0 ? sorted_.front() : (j == count ? sorted_.back() : p.l + p.s * std::sinh(t));
            values[j] = log_density(nodes[j]);
        }

        long double total = 0.0L;
        std::size_t begin = 0;
        for (std::size_t j = 0; j < count; ++j) {
            const double a = nodes[j];
            const double b = nodes[j + 1];
            const std::size_t end =
                j + 1 == count ? sorted_.size()
                               : static_cast<std::size_t>(std::lower_bound(sorted_.begin() + static_cast<std::ptrdiff_t>(begin),
                                                                           sorted_.end(), b) -
                                                          sorted_.begin());
            const auto n = static_cast<long double>(end - begin);
            if (end > begin) {
                const long double sum_offset = (prefix_[end] - prefix_[begin]) - n * a;
                const long double slope = b > a ? (values[j + 1] - values[j]) / static_cast<long double>(b - a) : 0.0L;
                total += n * values[j] + slope * sum_offset;
            }
            begin = end;
        }
        return static_cast<double>(total);
    }

private:
    std::vector<double> sorted_;
    std::vector<long double> prefix_;
    NctFitOptions options_;
};

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace detail

/// Fit nct(k, c, l, s) by maximum likelihood with Nelder-Mead from eight
/// deterministic starts. Throws FitDidNotConverge (carrying the best
/// parameters reached) on degenerate data or when no start converges.
inline NctFit fit_nct_mle(std::span<const double> data, const NctFitOptions& options = {}) {
    if (data.size() < 50) {
        throw InsufficientPoints("nct fit needs at least 50 observations, got " + std::to_string(data.size()));
    }
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw InvalidArgument("nct fit input contains a non-finite value");
        }
    }
    const detail::NctLogLikelihood loglik(data, options);
    const auto& sorted = loglik.sorted();
    const double median = detail::quantile_sorted(sorted, 0.5);
    const double q1 = detail::quantile_sorted(sorted, 0.25);
    const double q3 = detail::quantile_sorted(sorted, 0.75);
    const double iqr = q3 - q1;

    // Upper quartile of the central t for the starting degrees of freedom.
    struct Seed {
        double k;
        double q75;
    };
    constexpr Seed seeds[] = {{2.0, 0.8165}, {3.0, 0.7649}, {6.0, 0.7176}, {30.0, 0.6828}};
    const double bowley = iqr > 0.0 ? (q3 + q1 - 2.0 * median) / iqr : 0.0;
    const double skew_sign = bowley < 0.0 ? -1.0 : 1.0;

    NctFit fit;
    for (const Seed& seed : seeds) {
        for (double c : {0.0, skew_sign}) {
            const double s = iqr > 0.0 ? iqr / (2.0 * seed.q75) : 1.0;
            fit.starts.push_back(NctParams{});
            fit.starts.back().k = seed.k;
            fit.starts.back().c = c;
            fit.starts.back().s = s;
            fit.starts.back().l = median - s * c;
        }
    }
    if (!(iqr > 0.0)) {
        throw FitDidNotConverge<NctParams>("degenerate sample (zero interquartile range)", fit.starts.front());
    }

    const double n = static_cast<double>(loglik.size());
    const double location_scale = iqr;
    auto to_params = [&](std::span<const double> theta) {
        NctParams p;
        p.k = std::exp(theta[0]);
        p.c = theta[1];
        p.l = theta[2] * location_scale;
        p.s = std::exp(theta[3]);
        return p;
    };
    auto objective = [&](std::span<const double> theta) {
        if (theta[0] < std::log(0.2) || theta[0] > std::log(1e4) || std::abs(theta[1]) > 50.0) {
            return std::numeric_limits<double>::infinity();
        }
        const double value = loglik(to_params(theta));
        return std::isfinite(value) ? -value / n : std::numeric_limits<double>::infinity();
    };

    numeric::NelderMeadOptions nm;
    nm.f_tol = options.f_tol;
    nm.max_evaluations = options.max_evaluations;
    nm.initial_step = 0.2;

    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> best_theta;
    bool any_converged = false;
    for (const NctParams& start : fit.starts) {
        std::vector<double> theta{std::log(start.k), start.c, start.l / location_scale, std::log(start.s)};
        fit.start_log_likelihoods.push_back(-objective(theta) * n);
        auto result = numeric::nelder_mead(objective, theta, nm);
        fit.evaluations += result.evaluations;
        if (result.converged) {
            // One restart from the optimum guards against a collapsed simplex.
            auto polished = numeric::nelder_mead(objective, result.x, nm);
            fit.evaluations += polished.evaluations;
            if (polished.value <= result.value) {
                result = std::move(polished);
            }
        }
        any_converged = any_converged || result.converged;
        if (result.value < best_value) {
            best_value = result.value;
            best_theta = result.x;
        }
    }
    fit.params = to_params(best_theta);
    fit.log_likelihood = -best_value * n;
    fit.converged = any_converged;
    if (!any_converged) {
        throw FitDidNotConverge<NctParams>("no start met the log-likelihood tolerance", fit.params);
    }
    return fit;
}

}  // namespace kesten
