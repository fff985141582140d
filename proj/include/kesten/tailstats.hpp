// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Empirical tails P_N(X > x), log-log power-law fits, lognormal fits,
// percentiles and Gaussian kernel density estimates.
//
// The power-law fit is ordinary least squares on (log w, log P) inside a
// window. It is known to be biased (Clauset, Shalizi, Newman 2009); it is
// kept because it is the estimator the exponent values in this domain are
// quoted with.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "kesten/errors.hpp"
#include "kesten/numeric.hpp"

namespace kesten {

struct TailPoint {
    double wealth = 0.0;
    double exceedance = 0.0;

    friend bool operator==(const TailPoint&, const TailPoint&) = default;
};

/// Sorted (wealth, P(X > wealth)) points.
struct EmpiricalTail {
    std::vector<TailPoint> points;
    std::optional<double> households_total;

    bool empty() const noexcept { return points.empty(); }

    /// Throws InvalidArgument unless wealth is strictly increasing and
    /// exceedance is non-increasing within [0, 1].
    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (!std::isfinite(p.wealth) || !(p.exceedance >= 0.0 && p.exceedance <= 1.0)) {
                throw InvalidArgument("tail point out of range");
            }
            if (i > 0 && !(p.wealth > points[i - 1].wealth)) {
                throw InvalidArgument("tail wealth must be strictly increasing");
            }
            if (i > 0 && p.exceedance > points[i - 1].exceedance) {
                throw InvalidArgument("tail exceedance must be non-increasing");
            }
        }
    }
};

struct FitWindow {
    double lo = 0.0;
    double hi = 0.0;
};

struct PowerLawFit {
    double alpha_coef = 0.0;  // prefactor of P(X > x) ~ alpha_coef / x^beta
    double beta = 0.0;
    FitWindow window;
    double r_squared = 0.0;
    std::size_t points = 0;
};

struct LognormalFit {
    double mu_log = 0.0;
    double sigma_log = 0.0;
    double ks_distance = 0.0;
};

struct DensityCurve {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;
};

/// Exceedance (count of entries > x_i) / N at each distinct value x_i.
inline EmpiricalTail empirical_tail(std::span<const double> sample) {
    if (sample.empty()) {
        throw EmptyInput("empirical tail of an empty sample");
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    EmpiricalTail tail;
    tail.households_total = n;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        tail.points.push_back({sorted[i], static_cast<double>(sorted.size() - j) / n});
        i = j;
    }
    return tail;
}

/// Smallest tail wealth whose exceedance is <= p (right-continuous inverse).
inline double percentile_wealth(const EmpiricalTail& tail, double p) {
    if (tail.empty()) {
        throw EmptyInput("percentile of an empty tail");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("percentile probability must lie in [0, 1]");
    }
    // Exceedance is non-increasing, so the first point with exceedance <= p.
    const auto it = std::partition_point(tail.points.begin(), tail.points.end(),
                                         [p](const TailPoint& pt) { return pt.exceedance > p; });
    if (it == tail.points.end()) {
        throw InvalidArgument("no tail point has exceedance at or below the requested level");
    }
    return it->wealth;
}

inline double percentile_wealth(std::span<const double> sample, double p) {
    return percentile_wealth(empirical_tail(sample), p);
}

/// Population size behind a tail: the recorded household count, or the
/// reciprocal of the smallest positive exceedance.
inline double tail_population(const EmpiricalTail& tail) {
    if (tail.households_total) {
        return *tail.households_total;
    }
    double smallest = 1.0;
    for (const auto& p : tail.points) {
        if (p.exceedance > 0.0) {
            smallest = std::min(smallest, p.exceedance);
        }
    }
    return std::round(1.0 / smallest);
}

/// [99th percentile wealth, largest wealth with exceedance >= 10 / N].
inline FitWindow default_fit_window(const EmpiricalTail& tail) {
    if (tail.empty()) {
        throw EmptyInput("fit window of an empty tail");
    }
    FitWindow window;
    window.lo = percentile_wealth(tail, 0.01);
    const double floor_exceedance = 10.0 / tail_population(tail);
    window.hi = window.lo;
    for (const auto& p : tail.points) {
        if (p.exceedance >= floor_exceedance) {
            window.hi = std::max(window.hi, p.wealth);
        }
    }
    return window;
}

/// Least squares of log exceedance on log wealth over points in [lo, hi]
/// with positive exceedance.
inline PowerLawFit fit_power_law(const EmpiricalTail& tail, FitWindow window) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : tail.points) {
        if (p.wealth >= window.lo && p.wealth <= window.hi && p.exceedance > 0.0 && p.wealth > 0.0) {
            x.push_back(std::log(p.wealth));
            y.push_back(std::log(p.exceedance));
        }
    }
    if (x.size() < 3) {
        throw InsufficientPoints("power-law fit needs 3 points with positive exceedance in the window, got " +
                                 std::to_string(x.size()));
    }
    const auto line = numeric::least_squares_line(x, y);
    PowerLawFit fit;
    fit.beta = -line.slope;
    fit.alpha_coef = std::exp(line.intercept);
    fit.window = window;
    fit.r_squared = line.r_squared;
    fit.points = x.size();
    return fit;
}

inline PowerLawFit fit_power_law(const EmpiricalTail& tail) {
    return fit_power_law(tail, default_fit_window(tail));
}

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::span<const double> sample, Cdf&& cdf) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Moment fit of log-wealth plus the KS distance to the implied lognormal.
inline LognormalFit fit_lognormal(std::span<const double> sample) {
    if (sample.empty()) {
        throw EmptyInput("lognormal fit of an empty sample");
    }
    std::vector<double> logs;
    logs.reserve(sample.size());
    for (double w : sample) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw InvalidArgument("lognormal fit needs finite, strictly positive values");
        }
        logs.push_back(std::log(w));
    }
    const auto mv = numeric::mean_variance(logs);
    if (!(mv.variance > 0.0) || std::sqrt(mv.variance) <= 1e-14 * std::max(1.0, std::abs(mv.mean))) {
        throw ZeroVariance("log-wealth has zero variance");
    }
    LognormalFit fit;
    fit.mu_log = mv.mean;
    fit.sigma_log = std::sqrt(mv.variance);
    fit.ks_distance = ks_distance(logs, [&](double z) { return standard_normal_cdf((z - fit.mu_log) / fit.sigma_log); });
    return fit;
}

/// Reference-rule bandwidth 1.06 sigma N^(-1/5).
inline double reference_bandwidth(std::span<const double> sample) {
    const auto mv = numeric::mean_variance(sample);
    const double sigma = std::sqrt(mv.variance);
    if (!(sigma > 0.0)) {
        throw ZeroVariance("automatic bandwidth needs a sample with spread");
    }
    return 1.06 * sigma * std::pow(static_cast<double>(sample.size()), -0.2);
}

/// Gaussian-kernel density on an even grid spanning the data +- 4 bandwidths.
inline DensityCurve kernel_density(std::span<const double> sample, std::optional<double> bandwidth = std::nullopt,
                                   std::size_t grid_points = 512) {
    if (sample.empty()) {
        throw EmptyInput("kernel density of an empty sample");
    }
    if (grid_points < 2) {
        throw InvalidArgument("kernel density grid needs at least two points");
    }
    const double h = bandwidth ? *bandwidth : reference_bandwidth(sample);
    if (!(h > 0.0)) {
        throw InvalidArgument("bandwidth must be positive");
    }
    const auto [min_it, max_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo = *min_it - 4.0 * h;
    const double hi = *max_it + 4.0 * h;
    DensityCurve curve;
    curve.bandwidth = h;
    curve.x.resize(grid_points);
    curve.density.assign(grid_points, 0.0);
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    const double norm = 1.0 / (static_cast<double>(sample.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < grid_points; ++g) {
        curve.x[g] = lo + step * static_cast<double>(g);
    }
    for (std::size_t g = 0; g < grid_points; ++g) {
        numeric::CompensatedSum acc;
        for (double xi : sample) {
            const double z = (curve.x[g] - xi) / h;
            acc += std::exp(-0.5 * z * z);
        }
        curve.density[g] = acc.value() * norm;
    }
    return curve;
}

}  // namespace kesten
