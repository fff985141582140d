// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "kesten/errors.hpp"
#include "kesten/numeric.hpp"

namespace kesten {

struct InequalityReport {
    double gini = 0.0;
    double top_share = 0.0;
    double q = 0.01;
    std::size_t n_agents = 0;
    double total_wealth = 0.0;
};

struct LorenzPoint {
    double households = 0.0;  // cumulative proportion of households
    double wealth = 0.0;      // cumulative proportion of wealth
};

namespace detail {

inline std::vector<double> sorted_positive(std::span<const double> wealth) {
    if (wealth.empty()) {
        throw EmptyInput("inequality measures need at least one agent");
    }
    std::vector<double> sorted(wealth.begin(), wealth.end());
    for (double w : sorted) {
        if (!std::isfinite(w) || !(w > 0.0)) {
            throw InvalidArgument("inequality measures need finite, strictly positive wealth");
        }
    }
    std::stable_sort(sorted.begin(), sorted.end());
    return sorted;
}

/// First 1-based rank counted in the top q share: ranks i > (1 - q) N.
/// The threshold is snapped to an integer when it is one up to rounding, so
/// q = 0.01 with N = 100 counts exactly one agent.
inline std::size_t top_share_first_rank(std::size_t n, double q) {
    double threshold = (1.0 - q) * static_cast<double>(n);
    const double nearest = std::round(threshold);
    if (std::abs(threshold - nearest) <= 1e-9 * std::max(1.0, threshold)) {
        threshold = nearest;
    }
    return static_cast<std::size_t>(std::floor(threshold)) + 1;
}

inline double gini_sorted(std::span<const double> sorted, double total) {
    numeric::CompensatedSum weighted;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        weighted += static_cast<double>(i + 1) * sorted[i];
    }
    const double n = static_cast<double>(sorted.size());
    return 2.0 / n * weighted.value() / total - (n + 1.0) / n;
}

inline double top_share_sorted(std::span<const double> sorted, double q, double total) {
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidArgument("top share fraction q must lie in (0, 1)");
    }
    const std::size_t first = top_share_first_rank(sorted.size(), q);
    numeric::CompensatedSum top;
    for (std::size_t rank = first; rank <= sorted.size(); ++rank) {
        top += sorted[rank - 1];
    }
    return top.value() / total;
}

}  // namespace detail

/// Gini coefficient g = (2/N) sum_i i w_(i) / W - (N+1)/N over the ascending sample.
inline double gini(std::span<const double> wealth) {
    const auto sorted = detail::sorted_positive(wealth);
    return detail::gini_sorted(sorted, numeric::compensated_sum(sorted));
}

/// Share of total wealth held by ranks i > (1 - q) N of the ascending sample.
inline double top_share(std::span<const double> wealth, double q = 0.01) {
    const auto sorted = detail::sorted_positive(wealth);
    return detail::top_share_sorted(sorted, q, numeric::compensated_sum(sorted));
}

/// Gini and top share from a single sort.
inline InequalityReport inequality_report(std::span<const double> wealth, double q = 0.01) {
    const auto sorted = detail::sorted_positive(wealth);
    InequalityReport report;
    report.total_wealth = numeric::compensated_sum(sorted);
    report.gini = detail::gini_sorted(sorted, report.total_wealth);
    report.top_share = detail::top_share_sorted(sorted, q, report.total_wealth);
    report.q = q;
    report.n_agents = sorted.size();
    return report;
}

/// Lorenz curve from (0, 0) to (1, 1), one point per agent.
inline std::vector<LorenzPoint> lorenz_points(std::span<const double> wealth) {
    const auto sorted = detail::sorted_positive(wealth);
    const double total = numeric::compensated_sum(sorted);
    const double n = static_cast<double>(sorted.size());
    std::vector<LorenzPoint> points;
    points.reserve(sorted.size() + 1);
    points.push_back({0.0, 0.0});
    numeric::CompensatedSum cumulative;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        points.push_back({static_cast<double>(i + 1) / n, cumulative.value() / total});
    }
    points.back() = {1.0, 1.0};
    return points;
}

}  // namespace kesten
