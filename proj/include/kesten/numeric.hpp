// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "kesten/errors.hpp"

namespace kesten::numeric {

/// Neumaier-compensated accumulator. Wealth vectors span many orders of
/// magnitude, so plain summation loses the small holders.
class CompensatedSum {
public:
    CompensatedSum& operator+=(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum acc;
    for (double x : xs) {
        acc += x;
    }
    return acc.value();
}

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // unbiased (n - 1)
    std::size_t count = 0;
};

/// Welford's one-pass mean and variance.
inline MeanVar mean_variance(std::span<const double> xs) noexcept {
    MeanVar out;
    double m2 = 0.0;
    for (double x : xs) {
        ++out.count;
        const double delta = x - out.mean;
        out.mean += delta / static_cast<double>(out.count);
        m2 += delta * (x - out.mean);
    }
    out.variance = out.count > 1 ? m2 / static_cast<double>(out.count - 1) : 0.0;
    return out;
}

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
    std::size_t count = 0;
};

inline LinearFit least_squares_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InsufficientPoints("least squares needs at least two paired points");
    }
    const double n = static_cast<double>(x.size());
    const double mx = compensated_sum(x) / n;
    const double my = compensated_sum(y) / n;
    CompensatedSum sxx;
    CompensatedSum sxy;
    CompensatedSum syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx.value() > 0.0)) {
        throw InsufficientPoints("least squares needs at least two distinct abscissae");
    }
    LinearFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy.value() > 0.0 ? (sxy.value() * sxy.value()) / (sxx.value() * syy.value()) : 1.0;
    fit.count = x.size();
    return fit;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7/15) quadrature
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double integral;
    double error;
    bool operator<(const Segment& other) const noexcept { return error < other.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        kronrod += kKronrodWeights[j] * (f1 + f2);
        if (j % 2 == 1) {
            gauss += kGaussWeights[j / 2] * (f1 + f2);
        }
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
};

/// Integrate f over the consecutive segments [breaks[i], breaks[i+1]],
/// bisecting the worst segment until the summed error estimate is below
/// `abs_tol` or `max_segments` is reached.
template <class F>
QuadratureResult integrate(F&& f, std::span<const double> breaks, double abs_tol,
                           std::size_t max_segments = 400) {
    std::priority_queue<detail::Segment> heap;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) {
            heap.push(detail::gauss_kronrod_15(f, breaks[i], breaks[i + 1]));
        }
    }
    auto totals = [&heap] {
        auto copy = heap;
        CompensatedSum value;
        double error = 0.0;
        while (!copy.empty()) {
            value += copy.top().integral;
            error += copy.top().error;
            copy.pop();
        }
        return std::pair{value.value(), error};
    };
    double error = 0.0;
    double value = 0.0;
    {
        auto [v, e] = totals();
        value = v;
        error = e;
    }
    while (error > abs_tol && heap.size() < max_segments) {
        const detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        heap.push(left);
        heap.push(right);
        error += left.error + right.error - worst.error;
        value += left.integral + right.integral - worst.integral;
        if (error <= abs_tol) {
            // Running sums drift; confirm against a fresh total.
            auto [v, e] = totals();
            value = v;
            error = e;
        }
    }
    auto [v, e] = totals();
    return {v, e, e <= abs_tol};
}

// ---------------------------------------------------------------------------
// Derivative-free minimisation
// ---------------------------------------------------------------------------

struct NelderMeadOptions {
    double f_tol = 1e-8;          // stop when best-worst spread falls below this
    double x_tol = 1e-10;         // ... or the simplex collapses to this size
    std::size_t max_evaluations = 4000;
    double initial_step = 0.1;    // per-coordinate offset for the starting simplex
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Nelder-Mead simplex minimisation with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                    std::vector<double> start, const NelderMeadOptions& options = {}) {
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> simplex(dim + 1, start);
    std::vector<double> values(dim + 1);
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    for (std::size_t i = 0; i < dim; ++i) {
        const double step = start[i] != 0.0 ? options.initial_step * std::abs(start[i]) : options.initial_step;
        simplex[i + 1][i] += step;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
        values[i] = eval(simplex[i]);
    }

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim);
    std::vector<double> trial(dim);
    auto point_along = [&](double t, std::vector<double>& out, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < dim; ++j) {
            out[j] = centroid[j] + t * (worst[j] - centroid[j]);
        }
    };

    while (result.evaluations < options.max_evaluations) {
        for (std::size_t i = 0; i <= dim; ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[dim - 1];

        double size = 0.0;
        for (std::size_t i = 0; i <= dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                size = std::max(size, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        if (std::abs(values[worst] - values[best]) < options.f_tol || size < options.x_tol) {
            result.converged = std::isfinite(values[best]);
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j) {
                centroid[j] += simplex[i][j] / static_cast<double>(dim);
            }
        }

        point_along(-1.0, trial, simplex[worst]);
        const double reflected = eval(trial);
        if (reflected < values[best]) {
            std::vector<double> expanded(dim);
            point_along(-2.0, expanded, simplex[worst]);
            const double ve = eval(expanded);
            if (ve < reflected) {
                simplex[worst] = std::move(expanded);
                values[worst] = ve;
            } else {
                simplex[worst] = trial;
                values[worst] = reflected;
            }
            continue;
        }
        if (reflected < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = reflected;
            continue;
        }
        const bool outside = reflected < values[worst];
        std::vector<double> contracted(dim);
        point_along(outside ? -0.5 : 0.5, contracted, simplex[worst]);
        const double vc = eval(contracted);
        if (vc < std::min(reflected, values[worst])) {
            simplex[worst] = std::move(contracted);
            values[worst] = vc;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = eval(simplex[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    return result;
}

struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for a minimum of a unimodal f on [lo, hi].
template <class F>
ScalarMinimum golden_section(F&& f, double lo, double hi, double x_tol = 1e-10,
                             std::size_t max_iterations = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (std::size_t it = 0; it < max_iterations && (b - a) > x_tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, double x_tol = 1e-12, std::size_t max_iterations = 200) {
    double flo = f(lo);
    for (std::size_t it = 0; it < max_iterations && (hi - lo) > x_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace kesten::numeric
