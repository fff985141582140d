// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Estimation pipeline from survey and rich-list data: Lorenz buckets to an
// empirical tail, percentile rates of return, extraction of the return
// prefactor alpha, gamma selection and the savings fit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kesten/errors.hpp"
#include "kesten/numeric.hpp"
#include "kesten/process.hpp"
#include "kesten/tailstats.hpp"
#include "kesten/theory.hpp"

namespace kesten {

struct LorenzRow {
    double households = 0.0;  // cumulative proportion
    double wealth = 0.0;      // cumulative proportion
};

struct LorenzSurvey {
    int year = 0;
    std::vector<LorenzRow> rows;
    double households_total = 0.0;  // H
    double total_wealth = 0.0;      // W, GBP

    void validate() const {
        if (rows.size() < 2) {
            throw InsufficientPoints("a Lorenz survey needs at least the rows (0,0) and (1,1)");
        }
        if (!(households_total > 0.0) || !(total_wealth > 0.0)) {
            throw InvalidArgument("survey totals H and W must be positive");
        }
        if (rows.front().households != 0.0 || rows.front().wealth != 0.0) {
            throw InvalidArgument("Lorenz survey must start at (0, 0)");
        }
        if (rows.back().households != 1.0 || rows.back().wealth != 1.0) {
            throw InvalidArgument("Lorenz survey must end at (1, 1)");
        }
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].households < rows[i - 1].households || rows[i].wealth < rows[i - 1].wealth) {
                throw InvalidArgument("Lorenz columns must be non-decreasing");
            }
        }
    }
};

struct RichList {
    int year = 0;
    std::vector<double> wealth;     // GBP, any order
    double households_total = 0.0;  // H of the population the list is drawn from
};

/// One Lorenz bucket: total wealth w_hat and households h_hat between two rows.
struct LorenzBucket {
    double wealth_total = 0.0;
    double households = 0.0;
    double mean_wealth = 0.0;
    double exceedance = 0.0;  // 1 - h_(i+1)
};

inline std::vector<LorenzBucket> lorenz_buckets(const LorenzSurvey& survey) {
    survey.validate();
    std::vector<LorenzBucket> buckets;
    buckets.reserve(survey.rows.size() - 1);
    for (std::size_t i = 0; i + 1 < survey.rows.size(); ++i) {
        const auto& a = survey.rows[i];
        const auto& b = survey.rows[i + 1];
        LorenzBucket bucket;
        bucket.households = (b.households - a.households) * survey.households_total;
        bucket.wealth_total = (b.wealth - a.wealth) * survey.total_wealth;
        if (!(bucket.households > 0.0)) {
            throw ZeroBucket("Lorenz rows " + std::to_string(i) + " and " + std::to_string(i + 1) +
                             " hold no households");
        }
        bucket.mean_wealth = bucket.wealth_total / bucket.households;
        bucket.exceedance = 1.0 - b.households;
        buckets.push_back(bucket);
    }
    return buckets;
}

/// Bucket mean wealth against 1 - h_(i+1), positive buckets only. Buckets
/// with equal mean wealth collapse into one point carrying the smaller
/// exceedance, so the tail stays strictly increasing in wealth.
inline EmpiricalTail lorenz_to_tail(const LorenzSurvey& survey) {
    const auto buckets = lorenz_buckets(survey);
    EmpiricalTail tail;
    tail.households_total = survey.households_total;
    double previous = -std::numeric_limits<double>::infinity();
    for (const auto& b : buckets) {
        if (b.mean_wealth < previous && previous - b.mean_wealth > 1e-12 * std::abs(previous)) {
            throw NonMonotoneWealth("bucket mean wealth " + std::to_string(b.mean_wealth) + " follows " +
                                    std::to_string(previous) + "; rows are not ordered by wealth");
        }
        previous = std::max(previous, b.mean_wealth);
        if (!(b.mean_wealth > 0.0)) {
            continue;
        }
        if (!tail.points.empty() && b.mean_wealth <= tail.points.back().wealth) {
            tail.points.back().exceedance = b.exceedance;
            continue;
        }
        tail.points.push_back({b.mean_wealth, b.exceedance});
    }
    return tail;
}

/// Rebuild cumulative Lorenz rows from an unmerged survey tail. Each point
/// stands for the households between its exceedance and the previous one.
inline std::vector<LorenzRow> tail_to_lorenz(const EmpiricalTail& tail, double households_total,
                                             double total_wealth, double first_exceedance = 1.0) {
    std::vector<LorenzRow> rows{{0.0, 0.0}};
    double upper = first_exceedance;
    numeric::CompensatedSum cumulative;
    for (const auto& p : tail.points) {
        const double households = (upper - p.exceedance) * households_total;
        cumulative += p.wealth * households;
        rows.push_back({1.0 - p.exceedance, cumulative.value() / total_wealth});
        upper = p.exceedance;
    }
    return rows;
}

/// Append (w_i, (R - i)/H) for the ascending rich list. Survey exceedances
/// are floored at R/H so the combined tail stays non-increasing.
inline EmpiricalTail merge_rich_list(const EmpiricalTail& tail, const RichList& rich) {
    if (rich.wealth.empty()) {
        throw EmptyInput("rich list is empty");
    }
    if (!(rich.households_total > 0.0)) {
        throw InvalidArgument("rich list population H must be positive");
    }
    std::vector<double> sorted = rich.wealth;
    std::sort(sorted.begin(), sorted.end());
    if (!(sorted.front() > 0.0)) {
        throw InvalidArgument("rich list wealth must be positive");
    }
    if (!tail.empty() && !(sorted.front() > tail.points.back().wealth)) {
        throw Overlap("rich list minimum " + std::to_string(sorted.front()) + " is not above the survey maximum " +
                      std::to_string(tail.points.back().wealth));
    }
    const double r = static_cast<double>(sorted.size());
    const double h = rich.households_total;
    EmpiricalTail merged;
    merged.households_total = h;
    for (const auto& p : tail.points) {
        merged.points.push_back({p.wealth, std::max(p.exceedance, r / h)});
    }
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double rank = static_cast<double>(i + 1);
        if (!merged.points.empty() && sorted[i] == merged.points.back().wealth) {
            merged.points.back().exceedance = (r - rank) / h;
        } else {
            merged.points.push_back({sorted[i], (r - rank) / h});
        }
    }
    merged.validate();
    return merged;
}

// ---------------------------------------------------------------------------
// Rates of return
// ---------------------------------------------------------------------------

struct RorRecord {
    int percentile = 0;  // 1..100
    double wealth = 0.0;
    double next_wealth = 0.0;
    double ror = 0.0;
    double savings = 0.0;
};

struct RorSeries {
    std::vector<RorRecord> records;
    double period_years = 2.0;
};

/// (w, r) pair: wealth at the start of a period and the per-year return.
struct ReturnPoint {
    double wealth = 0.0;
    double ror = 0.0;
};

/// Consecutive wealth of one household and the savings it received in between.
struct WealthPair {
    double wealth = 0.0;
    double next_wealth = 0.0;
    double savings = 0.0;
};

/// r = (w' - w - period S(w)) / (period w) on percentile wealth, for the
/// integer percentiles 1..100 that exist in both tails.
inline RorSeries percentile_ror(const EmpiricalTail& tail_t, const EmpiricalTail& tail_t2, const SavingsModel& savings,
                                double period_years = 2.0) {
    if (!(period_years > 0.0)) {
        throw InvalidArgument("period length must be positive");
    }
    tail_t.validate();
    tail_t2.validate();
    RorSeries series;
    series.period_years = period_years;
    for (int i = 1; i <= 100; ++i) {
        const double p = 1.0 - static_cast<double>(i) / 100.0;
        double w = 0.0;
        double w2 = 0.0;
        try {
            w = percentile_wealth(tail_t, p);
            w2 = percentile_wealth(tail_t2, p);
        } catch (const InputError&) {
            continue;
        }
        if (!(w > 0.0)) {
            continue;
        }
        RorRecord rec;
        rec.percentile = i;
        rec.wealth = w;
        rec.next_wealth = w2;
        rec.savings = savings(w);
        rec.ror = (w2 - w - period_years * rec.savings) / (period_years * w);
        series.records.push_back(rec);
    }
    if (series.records.empty()) {
        throw MissingPercentile("no positive percentile is present in both tails");
    }
    return series;
}

inline std::vector<ReturnPoint> return_points(const RorSeries& series) {
    std::vector<ReturnPoint> out;
    out.reserve(series.records.size());
    for (const auto& r : series.records) {
        out.push_back({r.wealth, r.ror});
    }
    return out;
}

/// Per-period return (w' - w - S) / w of each pair.
inline std::vector<ReturnPoint> return_points(std::span<const WealthPair> pairs) {
    std::vector<ReturnPoint> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (!(p.wealth > 0.0)) {
            throw InvalidArgument("returns need positive starting wealth");
        }
        out.push_back({p.wealth, (p.next_wealth - p.wealth - p.savings) / p.wealth});
    }
    return out;
}

/// alpha = (W' - W - S) / W^gamma.
inline std::vector<double> extract_alpha(std::span<const WealthPair> pairs, double gamma) {
    std::vector<double> alpha;
    alpha.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (!(p.wealth > 0.0)) {
            throw InvalidArgument("alpha extraction needs positive wealth");
        }
        alpha.push_back((p.next_wealth - p.wealth - p.savings) / std::pow(p.wealth, gamma));
    }
    return alpha;
}

/// alpha = r w^(1 - gamma) from returns already net of savings.
inline std::vector<double> extract_alpha(std::span<const ReturnPoint> points, double gamma) {
    std::vector<double> alpha;
    alpha.reserve(points.size());
    for (const auto& p : points) {
        if (!(p.wealth > 0.0)) {
            throw InvalidArgument("alpha extraction needs positive wealth");
        }
        alpha.push_back(p.ror * std::pow(p.wealth, 1.0 - gamma));
    }
    return alpha;
}

inline std::vector<double> extract_alpha(const RorSeries& series, double gamma) {
    const auto points = return_points(series);
    return extract_alpha(std::span<const ReturnPoint>(points), gamma);
}

// ---------------------------------------------------------------------------
// Gamma selection
// ---------------------------------------------------------------------------

struct GammaSelection {
    double gamma = 1.0;
    double objective = 0.0;  // |mean alpha_a - mean alpha_b| at gamma
    bool no_crossing = false;
};

/// gamma in [lo, hi] where the mean alpha of the two datasets agree.
inline GammaSelection select_gamma(std::span<const ReturnPoint> a, std::span<const ReturnPoint> b, double lo = 1.0,
                                   double hi = 1.5) {
    if (a.empty() || b.empty()) {
        throw EmptyInput("gamma selection needs two nonempty datasets");
    }
    if (!(hi > lo)) {
        throw InvalidArgument("gamma search interval is empty");
    }
    auto gap = [&](double g) {
        const auto x = extract_alpha(a, g);
        const auto y = extract_alpha(b, g);
        return numeric::mean_variance(x).mean - numeric::mean_variance(y).mean;
    };
    auto objective = [&](double g) { return std::abs(gap(g)); };

    GammaSelection out;
    const double g_lo = gap(lo);
    const double g_hi = gap(hi);
    const double scale = std::max({std::abs(g_lo), std::abs(g_hi), 1e-300});
    const double mid = 0.5 * (lo + hi);
    if (std::abs(gap(mid)) <= 1e-14 * scale && std::abs(g_lo) <= 1e-14 * scale && std::abs(g_hi) <= 1e-14 * scale) {
        out.gamma = mid;
        out.objective = objective(mid);
        return out;
    }
    if ((g_lo < 0.0) == (g_hi < 0.0) && g_lo != 0.0 && g_hi != 0.0) {
        out.no_crossing = true;
        out.gamma = std::abs(g_lo) <= std::abs(g_hi) ? lo : hi;
        out.objective = std::abs(out.gamma == lo ? g_lo : g_hi);
        return out;
    }
    // |gap| also decays towards large gamma, so locate the sign change
    // rather than minimizing |gap|.
    out.gamma = numeric::bisect(gap, lo, hi, 1e-12);
    out.objective = objective(out.gamma);
    return out;
}

// ---------------------------------------------------------------------------
// Power-law return fit
// ---------------------------------------------------------------------------

struct PowerFitROR {
    double mu = 0.0;
    double gamma = 1.0;
    double sigma = 0.0;  // std of the pooled alpha sample at gamma
    bool gamma_fixed = false;
    double r_squared = 0.0;
    std::size_t used_points = 0;
    std::size_t excluded_nonpositive = 0;

    theory::Interval band(double w) const { return theory::ror_band(mu, sigma, gamma, w); }
};

/// log r = log mu + (gamma - 1) log w over points with r > 0. With a fixed
/// gamma only mu is fitted. sigma is the std of alpha over all points.
inline PowerFitROR fit_ror_power(std::span<const ReturnPoint> points, std::optional<double> fixed_gamma = std::nullopt) {
    if (points.size() < 3) {
        throw InsufficientPoints("return fit needs at least 3 points, got " + std::to_string(points.size()));
    }
    std::vector<double> x;
    std::vector<double> y;
    PowerFitROR fit;
    for (const auto& p : points) {
        if (!(p.wealth > 0.0) || !std::isfinite(p.ror)) {
            throw InvalidArgument("return points need positive wealth and finite returns");
        }
        if (p.ror > 0.0) {
            x.push_back(std::log(p.wealth));
            y.push_back(std::log(p.ror));
        } else {
            ++fit.excluded_nonpositive;
        }
    }
    if (x.empty()) {
        throw AllNonPositive("no positive return to fit in log space");
    }
    fit.used_points = x.size();
    if (fixed_gamma) {
        if (!(*fixed_gamma >= 1.0)) {
            throw InvalidArgument("fixed gamma must be >= 1");
        }
        fit.gamma = *fixed_gamma;
        fit.gamma_fixed = true;
        numeric::CompensatedSum acc;
        for (std::size_t i = 0; i < x.size(); ++i) {
            acc += y[i] - (fit.gamma - 1.0) * x[i];
        }
        fit.mu = std::exp(acc.value() / static_cast<double>(x.size()));
    } else {
        if (x.size() < 3) {
            throw InsufficientPoints("free return fit needs 3 positive returns, got " + std::to_string(x.size()));
        }
        const auto line = numeric::least_squares_line(x, y);
        fit.gamma = 1.0 + line.slope;
        fit.mu = std::exp(line.intercept);
        fit.r_squared = line.r_squared;
    }
    const auto alpha = extract_alpha(points, fit.gamma);
    fit.sigma = alpha.size() > 1 ? std::sqrt(numeric::mean_variance(alpha).variance) : 0.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Mean-variance relation
// ---------------------------------------------------------------------------

struct BinRatio {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double ratio = 0.0;  // variance / mean^2
};

struct MeanVarianceCheck {
    double pooled_ratio = 0.0;  // count-weighted mean of the bin ratios
    std::vector<BinRatio> bins;
};

/// var(r) / mean(r)^2 per wealth bin [edges[j], edges[j+1]). Bins with fewer
/// than min_count points are dropped.
inline MeanVarianceCheck mean_variance_check(std::span<const ReturnPoint> points, std::span<const double> edges,
                                             std::size_t min_count = 10) {
    if (edges.size() < 3) {
        throw InsufficientBins("mean-variance check needs at least two bins");
    }
    MeanVarianceCheck check;
    numeric::CompensatedSum weighted;
    std::size_t total = 0;
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        std::vector<double> r;
        for (const auto& p : points) {
            if (p.wealth >= edges[j] && p.wealth < edges[j + 1]) {
                r.push_back(p.ror);
            }
        }
        if (r.size() < min_count) {
            continue;
        }
        const auto mv = numeric::mean_variance(r);
        BinRatio bin{edges[j], edges[j + 1], r.size(), mv.mean, mv.variance, mv.variance / (mv.mean * mv.mean)};
        weighted += bin.ratio * static_cast<double>(bin.count);
        total += bin.count;
        check.bins.push_back(bin);
    }
    if (check.bins.size() < 2) {
        throw InsufficientBins("only " + std::to_string(check.bins.size()) + " bins hold " + std::to_string(min_count) +
                               " or more points");
    }
    check.pooled_ratio = weighted.value() / static_cast<double>(total);
    return check;
}

// ---------------------------------------------------------------------------
// Savings
// ---------------------------------------------------------------------------

struct SavingsPoint {
    double wealth = 0.0;
    double savings = 0.0;  // disposable income minus expenditure
};

struct DecileRow {
    double median_wealth = 0.0;
    double disposable_income = 0.0;
    double expenditure = 0.0;

    SavingsPoint point() const { return {median_wealth, disposable_income - expenditure}; }
};

struct SavingsParams {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa3 = 0.0;
};

struct SavingsFit {
    SavingsModel model;
    double residual_ss = 0.0;
    std::size_t evaluations = 0;
};

/// Least squares of S(w) = kappa1 / (1 + kappa2 w^kappa3) over (kappa2, kappa3)
/// with kappa1 fixed. Starts from the linearization
/// log(kappa1/S - 1) = log kappa2 + kappa3 log w and from a fixed kappa3 grid.
inline SavingsFit fit_savings(std::span<const SavingsPoint> data, double kappa1) {
    if (data.size() < 2) {
        throw InsufficientPoints("savings fit needs at least 2 points");
    }
    if (!(kappa1 > 0.0)) {
        throw InvalidArgument("kappa1 must be positive");
    }
    std::vector<double> log_w;
    std::vector<double> y;
    for (const auto& p : data) {
        if (!(p.wealth > 0.0) || !std::isfinite(p.savings)) {
            throw InvalidArgument("savings fit needs positive wealth and finite savings");
        }
        log_w.push_back(std::log(p.wealth));
        y.push_back(p.savings);
    }
    double scale = 0.0;
    for (double v : y) {
        scale += v * v;
    }
    scale = std::max(scale, 1e-300);

    // theta = (log kappa2, kappa3); kappa3 >= 0 is outside the model.
    auto sse = [&](std::span<const double> th) {
        if (!(th[1] < 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        numeric::CompensatedSum acc;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double t = th[0] + th[1] * log_w[i];
            const double s = t > 700.0 ? kappa1 * std::exp(-t) : kappa1 / (1.0 + std::exp(t));
            acc += (y[i] - s) * (y[i] - s);
        }
        return acc.value() / scale;
    };

    std::vector<std::vector<double>> starts;
    std::vector<double> lx;
    std::vector<double> lz;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > 0.0 && y[i] < kappa1) {
            lx.push_back(log_w[i]);
            lz.push_back(std::log(kappa1 / y[i] - 1.0));
        }
    }
    if (lx.size() >= 2) {
        bool spread = false;
        for (double v : lx) {
            spread = spread || v != lx.front();
        }
        if (spread) {
            const auto line = numeric::least_squares_line(lx, lz);
            if (line.slope < 0.0) {
                starts.push_back({line.intercept, line.slope});
            }
        }
    }
    std::vector<double> sorted_log_w = log_w;
    std::sort(sorted_log_w.begin(), sorted_log_w.end());
    const double mid_log_w = sorted_log_w[sorted_log_w.size() / 2];
    double mid_y = 0.0;
    {
        std::vector<double> pos;
        for (double v : y) {
            if (v > 0.0 && v < kappa1) {
                pos.push_back(v);
            }
        }
        std::sort(pos.begin(), pos.end());
        mid_y = pos.empty() ? 0.5 * kappa1 : pos[pos.size() / 2];
    }
    for (double k3 : {-0.25, -0.5, -1.0, -1.5, -2.0}) {
        // kappa2 chosen so the curve passes through (median w, median S).
        starts.push_back({std::log(kappa1 / mid_y - 1.0) - k3 * mid_log_w, k3});
    }

    numeric::NelderMeadOptions opts;
    opts.f_tol = 1e-14;
    opts.x_tol = 1e-12;
    opts.max_evaluations = 4000;
    std::optional<numeric::NelderMeadResult> best;
    std::size_t evaluations = 0;
    for (const auto& s : starts) {
        auto r = numeric::nelder_mead(sse, s, opts);
        evaluations += r.evaluations;
        if (!std::isfinite(r.value)) {
            continue;
        }
        // One restart from the optimum to shake off a collapsed simplex.
        auto polish = numeric::nelder_mead(sse, r.x, opts);
        evaluations += polish.evaluations;
        if (polish.value <= r.value) {
            r = polish;
        }
        if (!best || r.value < best->value) {
            best = r;
        }
    }
    if (!best) {
        throw FitDidNotConverge<SavingsParams>("no start gave a finite residual", {kappa1, 0.0, 0.0});
    }
    const SavingsParams params{kappa1, std::exp(best->x[0]), best->x[1]};
    if (!(params.kappa3 < -1e-4) || !std::isfinite(params.kappa2) || !(params.kappa2 > 0.0)) {
        throw FitDidNotConverge<SavingsParams>("kappa3 ran to the 0- boundary; the data show no wealth dependence",
                                               params);
    }
    SavingsFit fit;
    fit.model = SavingsModel::logistic(params.kappa1, params.kappa2, params.kappa3);
    fit.residual_ss = best->value * scale;
    fit.evaluations = evaluations;
    return fit;
}

}  // namespace kesten
