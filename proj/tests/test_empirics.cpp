// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kesten/distributions.hpp"
#include "kesten/empirics.hpp"

using namespace kesten;

namespace {

LorenzSurvey hand_survey() {
    LorenzSurvey s;
    s.year = 2008;
    s.households_total = 4;
    s.total_wealth = 100;
    s.rows = {{0, 0}, {0.25, 0.05}, {0.5, 0.15}, {0.75, 0.35}, {1, 1}};
    return s;
}

std::vector<double> nct_draws(std::size_t n, std::uint64_t seed) {
    std::vector<double> a;
    a.reserve(n);
    for (std::uint32_t b = 0; a.size() < n; ++b) {
        RngStream rng(seed, b, 0);
        for (int j = 0; j < 1000 && a.size() < n; ++j) {
            a.push_back(sample_nct(billionaire_nct(), rng));
        }
    }
    return a;
}

}  // namespace

TEST(LorenzToTail, HandExample) {
    const auto tail = lorenz_to_tail(hand_survey());
    const std::vector<TailPoint> want{{5, 0.75}, {10, 0.5}, {20, 0.25}, {65, 0}};
    ASSERT_EQ(tail.points.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_NEAR(tail.points[i].wealth, want[i].wealth, 1e-12);
        EXPECT_EQ(tail.points[i].exceedance, want[i].exceedance);
    }
    EXPECT_EQ(*tail.households_total, 4.0);
}

TEST(LorenzToTail, BucketsTelescope) {
    const auto buckets = lorenz_buckets(hand_survey());
    double w = 0.0;
    double h = 0.0;
    for (const auto& b : buckets) {
        w += b.wealth_total;
        h += b.households;
    }
    EXPECT_DOUBLE_EQ(w, 100.0);
    EXPECT_DOUBLE_EQ(h, 4.0);
}

TEST(LorenzToTail, EqualBucketsAccepted) {
    LorenzSurvey s = hand_survey();
    s.rows = {{0, 0}, {0.25, 0.1}, {0.5, 0.2}, {1, 1}};
    const auto tail = lorenz_to_tail(s);
    ASSERT_EQ(tail.points.size(), 2u);
    EXPECT_NEAR(tail.points[0].wealth, 10.0, 1e-12);
    EXPECT_EQ(tail.points[0].exceedance, 0.5);
    EXPECT_NEAR(tail.points[1].wealth, 40.0, 1e-12);
}

TEST(LorenzToTail, SkipsNonPositiveBuckets) {
    LorenzSurvey s = hand_survey();
    s.rows = {{0, 0}, {0.25, 0}, {0.5, 0.15}, {1, 1}};
    const auto tail = lorenz_to_tail(s);
    ASSERT_EQ(tail.points.size(), 2u);
    EXPECT_EQ(tail.points[0].exceedance, 0.5);
}

TEST(LorenzToTail, Errors) {
    LorenzSurvey s = hand_survey();
    s.rows = {{0, 0}, {0.25, 0.3}, {0.5, 0.4}, {1, 1}};
    EXPECT_THROW(lorenz_to_tail(s), NonMonotoneWealth);
    s.rows = {{0, 0}, {0.5, 0.2}, {0.5, 0.3}, {1, 1}};
    EXPECT_THROW(lorenz_to_tail(s), ZeroBucket);
    s.rows = {{0, 0}, {0.5, 0.2}, {0.9, 0.9}};
    EXPECT_THROW(lorenz_to_tail(s), InvalidArgument);
    s = hand_survey();
    s.total_wealth = 0;
    EXPECT_THROW(lorenz_to_tail(s), InvalidArgument);
}

TEST(LorenzToTail, ReaggregationReproducesSurvey) {
    // Random convex Lorenz curves with increasing bucket means.
    for (std::uint32_t id = 0; id < 50; ++id) {
        RngStream rng(77, id, 0);
        const int k = 3 + static_cast<int>(rng.below(20));
        std::vector<double> h{0.0};
        for (int i = 1; i < k; ++i) {
            h.push_back(h.back() + 0.2 + rng.uniform());
        }
        std::vector<double> mean;
        double m = 1.0;
        for (int i = 0; i + 1 < k; ++i) {
            m *= 1.0 + 2.0 * rng.uniform();
            mean.push_back(m);
        }
        double total_h = h.back();
        double total_w = 0.0;
        for (int i = 0; i + 1 < k; ++i) {
            total_w += mean[i] * (h[i + 1] - h[i]);
        }
        LorenzSurvey s;
        s.households_total = 1000.0;
        s.total_wealth = 5e6;
        s.rows.push_back({0, 0});
        double cw = 0.0;
        for (int i = 0; i + 1 < k; ++i) {
            cw += mean[i] * (h[i + 1] - h[i]);
            s.rows.push_back({h[i + 1] / total_h, cw / total_w});
        }
        s.rows.back() = {1.0, 1.0};
        const auto tail = lorenz_to_tail(s);
        const auto rows = tail_to_lorenz(tail, s.households_total, s.total_wealth);
        ASSERT_EQ(rows.size(), s.rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            EXPECT_NEAR(rows[i].households, s.rows[i].households, 1e-12);
            EXPECT_NEAR(rows[i].wealth, s.rows[i].wealth, 1e-12);
        }
    }
}

TEST(MergeRichList, SingleRichHousehold) {
    EmpiricalTail tail;
    tail.points = {{5, 0.75}, {65, 0.25}};
    const auto merged = merge_rich_list(tail, RichList{2008, {1000.0}, 100.0});
    ASSERT_EQ(merged.points.size(), 3u);
    EXPECT_EQ(merged.points.back(), (TailPoint{1000.0, 0.0}));
    EXPECT_EQ(merged.points[1], (TailPoint{65, 0.25}));
}

TEST(MergeRichList, TwoRichHouseholds) {
    const auto merged = merge_rich_list(lorenz_to_tail(hand_survey()), RichList{2008, {9e9, 3e9}, 1e6});
    ASSERT_EQ(merged.points.size(), 6u);
    EXPECT_EQ(merged.points[4], (TailPoint{3e9, 1e-6}));
    EXPECT_EQ(merged.points[5], (TailPoint{9e9, 0.0}));
    merged.validate();
    // Survey points are floored at R/H so the combined tail stays non-increasing.
    EXPECT_EQ(merged.points[3].exceedance, 2e-6);
}

TEST(MergeRichList, OverlapAndEmpty) {
    const auto tail = lorenz_to_tail(hand_survey());
    EXPECT_THROW(merge_rich_list(tail, RichList{0, {30.0}, 100.0}), Overlap);
    EXPECT_THROW(merge_rich_list(tail, RichList{0, {65.0}, 100.0}), Overlap);
    EXPECT_THROW(merge_rich_list(tail, RichList{0, {}, 100.0}), EmptyInput);
}

TEST(MergeRichList, PreservesInvariantsOnRandomLists) {
    const auto tail = lorenz_to_tail(hand_survey());
    for (std::uint32_t id = 0; id < 50; ++id) {
        RngStream rng(5, id, 0);
        RichList rich{0, {}, 4.0 + static_cast<double>(rng.below(1000))};
        const int r = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < r; ++i) {
            rich.wealth.push_back(100.0 + std::floor(10 * rng.uniform()));
        }
        const auto merged = merge_rich_list(tail, rich);
        EXPECT_NO_THROW(merged.validate());
        EXPECT_EQ(merged.points.back().exceedance, 0.0);
    }
}

TEST(PercentileRor, TwoYearExample) {
    EmpiricalTail t1;
    t1.points = {{100.0, 0.0}};
    EmpiricalTail t2;
    t2.points = {{120.0, 0.0}};
    const auto s = SavingsModel::logistic(10.0, 100.0, -1.0);  // S(100) = 5
    const auto series = percentile_ror(t1, t2, s, 2.0);
    ASSERT_EQ(series.records.size(), 100u);
    for (const auto& r : series.records) {
        EXPECT_NEAR(r.ror, 0.05, 1e-15);
        EXPECT_NEAR(r.savings, 5.0, 1e-15);
    }
}

TEST(PercentileRor, NoGrowthAndBillionaireMode) {
    const auto tail = lorenz_to_tail(hand_survey());
    for (const auto& r : percentile_ror(tail, tail, SavingsModel::zero()).records) {
        EXPECT_EQ(r.ror, 0.0);
    }
    EmpiricalTail grown = tail;
    for (auto& p : grown.points) {
        p.wealth *= 1.1;
    }
    for (const auto& r : percentile_ror(tail, grown, SavingsModel::zero(), 2.0).records) {
        EXPECT_NEAR(r.ror, (r.next_wealth - r.wealth) / (2.0 * r.wealth), 1e-15);
        EXPECT_NEAR(r.ror, 0.05, 1e-12);
    }
}

TEST(PercentileRor, MissingPercentile) {
    EmpiricalTail t;
    t.points = {{5.0, 0.999}};
    EXPECT_THROW(percentile_ror(t, t, SavingsModel::zero()), MissingPercentile);
}

TEST(ExtractAlpha, Examples) {
    const std::vector<WealthPair> p{{100, 110, 0}};
    EXPECT_NEAR(extract_alpha(p, 1.0)[0], 0.1, 1e-15);
    EXPECT_NEAR(extract_alpha(p, 1.075)[0], 10.0 / std::pow(100.0, 1.075), 1e-15);
    EXPECT_NEAR(extract_alpha(p, 1.075)[0], 0.0708, 1e-4);
    const std::vector<WealthPair> s{{100, 107, 7}};
    EXPECT_EQ(extract_alpha(s, 1.2)[0], 0.0);
    const std::vector<WealthPair> bad{{0, 1, 0}};
    EXPECT_THROW(extract_alpha(bad, 1.0), InvalidArgument);
}

TEST(ExtractAlpha, ConsistentWithReturns) {
    RngStream rng(4, 0, 0);
    std::vector<WealthPair> pairs;
    for (int i = 0; i < 1000; ++i) {
        const double w = std::exp(5 + 15 * rng.uniform());
        pairs.push_back({w, w * (1.0 + 0.3 * rng.normal()), 0.0});
    }
    const auto pts = return_points(pairs);
    for (double g : {1.0, 1.075, 1.3}) {
        const auto a = extract_alpha(pairs, g);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            EXPECT_NEAR(pts[i].ror, a[i] * std::pow(pts[i].wealth, g - 1.0), 1e-12 * std::abs(pts[i].ror) + 1e-15);
        }
        const auto b = extract_alpha(std::span<const ReturnPoint>(pts), g);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            EXPECT_NEAR(a[i], b[i], 1e-12 * std::abs(a[i]) + 1e-300);
        }
    }
}

TEST(SelectGamma, IdenticalDatasetsGiveMidpoint) {
    const std::vector<ReturnPoint> a{{1e5, 0.02}, {1e6, 0.03}};
    const auto sel = select_gamma(a, a);
    EXPECT_EQ(sel.gamma, 1.25);
    EXPECT_FALSE(sel.no_crossing);
}

TEST(SelectGamma, RecoversPlantedGamma) {
    const auto a1 = nct_draws(1'000'000, 1);
    const auto a2 = nct_draws(1'000'000, 2);
    std::vector<ReturnPoint> low;
    std::vector<ReturnPoint> high;
    for (double a : a1) {
        low.push_back({1e5, a * std::pow(1e5, 0.075)});
    }
    for (double a : a2) {
        high.push_back({1e9, a * std::pow(1e9, 0.075)});
    }
    const auto sel = select_gamma(low, high);
    EXPECT_NEAR(sel.gamma, 1.075, 0.01);
    EXPECT_FALSE(sel.no_crossing);
    EXPECT_EQ(select_gamma(low, high).gamma, sel.gamma);
}

TEST(SelectGamma, NoCrossingReturnsBoundary) {
    const std::vector<ReturnPoint> a{{1e6, 0.05}, {1e6, 0.07}};
    const std::vector<ReturnPoint> b{{1e6, 0.01}, {1e6, 0.02}};
    const auto sel = select_gamma(a, b);
    EXPECT_TRUE(sel.no_crossing);
    EXPECT_EQ(sel.gamma, 1.5);
    EXPECT_THROW(select_gamma({}, b), EmptyInput);
}

TEST(FitRorPower, ExactFreeFit) {
    std::vector<ReturnPoint> pts;
    for (int i = 0; i < 100; ++i) {
        const double w = std::pow(10.0, 3.0 + 0.08 * i);
        pts.push_back({w, 0.013 * std::pow(w, 0.075)});
    }
    const auto fit = fit_ror_power(pts);
    EXPECT_NEAR(fit.mu, 0.013, 1e-10);
    EXPECT_NEAR(fit.gamma, 1.075, 1e-10);
    EXPECT_NEAR(fit.sigma, 0.0, 1e-12);
    EXPECT_EQ(fit.excluded_nonpositive, 0u);
}

TEST(FitRorPower, FixedGammaOne) {
    std::vector<ReturnPoint> pts;
    for (int i = 0; i < 20; ++i) {
        pts.push_back({1e4 * (i + 1), 0.032});
    }
    const auto fit = fit_ror_power(pts, 1.0);
    EXPECT_NEAR(fit.mu, 0.032, 1e-15);
    EXPECT_TRUE(fit.gamma_fixed);
    EXPECT_EQ(fit.gamma, 1.0);
}

TEST(FitRorPower, NoisyPoolRecovery) {
    RngStream rng(91, 0, 0);
    std::vector<ReturnPoint> pts;
    for (int i = 0; i < 2000; ++i) {
        const double w = std::pow(10.0, 4.0 + 5.0 * rng.uniform());
        pts.push_back({w, 0.003 * std::pow(w, 0.192) * std::exp(0.5 * rng.normal())});
    }
    pts.push_back({1e5, -0.01});
    const auto fit = fit_ror_power(pts);
    EXPECT_NEAR(fit.mu / 0.003, 1.0, 0.15);
    EXPECT_NEAR(fit.gamma / 1.192, 1.0, 0.15);
    EXPECT_EQ(fit.excluded_nonpositive, 1u);
    EXPECT_EQ(fit.used_points, 2000u);
}

TEST(FitRorPower, ConsistentAsSampleGrows) {
    auto error = [](int n) {
        RngStream rng(5, static_cast<std::uint32_t>(n), 0);
        std::vector<ReturnPoint> pts;
        for (int i = 0; i < n; ++i) {
            const double w = std::pow(10.0, 4.0 + 5.0 * rng.uniform());
            pts.push_back({w, 0.013 * std::pow(w, 0.075) * std::exp(0.5 * rng.normal())});
        }
        return std::abs(fit_ror_power(pts).gamma - 1.075);
    };
    EXPECT_LT(error(100000), error(100));
    EXPECT_LT(error(100000), 0.005);
}

TEST(FitRorPower, Errors) {
    const std::vector<ReturnPoint> two{{1, 0.1}, {2, 0.1}};
    EXPECT_THROW(fit_ror_power(two), InsufficientPoints);
    const std::vector<ReturnPoint> neg{{1, -0.1}, {2, -0.1}, {3, 0.0}};
    EXPECT_THROW(fit_ror_power(neg), AllNonPositive);
}

TEST(RorBand, Examples) {
    const auto flat = theory::ror_band(0.013, 0.0, 1.075, 1e6);
    EXPECT_EQ(flat.lo, flat.hi);
    const auto lin = theory::ror_band(0.03, 0.01, 1.0, 1e9);
    EXPECT_DOUBLE_EQ(lin.lo, 0.02);
    EXPECT_DOUBLE_EQ(lin.hi, 0.04);
    const auto mid = theory::ror_band(0.013, 0.005, 1.075, 1e6);
    EXPECT_NEAR(0.5 * (mid.lo + mid.hi), 0.0366, 1e-4);
    EXPECT_THROW(theory::ror_band(0.01, 0.0, 1.0, 0.0), InvalidArgument);
    PowerFitROR fit;
    fit.mu = 0.013;
    fit.sigma = 0.005;
    fit.gamma = 1.075;
    EXPECT_EQ(fit.band(1e6).lo, mid.lo);
}

TEST(MeanVariance, ConstantAlphaGivesZero) {
    std::vector<ReturnPoint> pts;
    for (int b = 4; b < 9; ++b) {
        for (int i = 0; i < 20; ++i) {
            const double w = std::pow(10.0, b + 0.5);
            pts.push_back({w, 0.02 * std::pow(w, 0.075)});
        }
    }
    const std::vector<double> edges{1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
    const auto c = mean_variance_check(pts, edges);
    EXPECT_EQ(c.bins.size(), 5u);
    EXPECT_NEAR(c.pooled_ratio, 0.0, 1e-25);
}

TEST(MeanVariance, RatioIndependentOfWealth) {
    // Common alpha draws and common within-bin offsets in every bin, so each
    // bin holds the same returns up to a constant factor.
    const auto alpha = nct_draws(1'000'000, 3);
    const std::vector<double> edges{1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
    std::vector<double> offset(alpha.size());
    RngStream rng(8, 0, 0);
    for (auto& u : offset) {
        u = rng.uniform();
    }
    std::vector<ReturnPoint> pts;
    std::vector<double> first_bin;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            const double w = edges[b] * std::pow(10.0, offset[i]);
            pts.push_back({w, alpha[i] * std::pow(w, 0.075)});
            if (b == 0) {
                first_bin.push_back(pts.back().ror);
            }
        }
    }
    const auto mv = numeric::mean_variance(first_bin);
    const double want = mv.variance / (mv.mean * mv.mean);
    const auto c = mean_variance_check(pts, edges);
    ASSERT_EQ(c.bins.size(), 5u);
    for (const auto& bin : c.bins) {
        EXPECT_EQ(bin.count, alpha.size());
        EXPECT_NEAR(bin.ratio / want, 1.0, 1e-9);
    }
    EXPECT_NEAR(c.pooled_ratio / want, 1.0, 1e-9);
}

TEST(MeanVariance, InsufficientBins) {
    std::vector<ReturnPoint> pts;
    for (int i = 0; i < 15; ++i) {
        pts.push_back({1e5, 0.01 * (i + 1)});
    }
    pts.push_back({1e7, 0.01});
    const std::vector<double> edges{1e4, 1e6, 1e8};
    EXPECT_THROW(mean_variance_check(pts, edges), InsufficientBins);
    const std::vector<double> one{1e4, 1e6};
    EXPECT_THROW(mean_variance_check(pts, one), InsufficientBins);
}

TEST(FitSavings, RecoversCalibratedCurve) {
    const auto truth = uk_savings();
    std::vector<SavingsPoint> pts;
    for (double w : {2e3, 1.5e4, 6e4, 1.25e5, 2e5, 2.9e5, 4e5, 5.6e5, 8.5e5, 1.6e6}) {
        pts.push_back({w, truth(w)});
    }
    const auto fit = fit_savings(pts, 1e6);
    EXPECT_NEAR(fit.model.kappa2() / 4.13e9, 1.0, 0.01);
    EXPECT_NEAR(fit.model.kappa3() / -1.308, 1.0, 0.01);
    EXPECT_EQ(fit.model.kappa1(), 1e6);
    const auto again = fit_savings(pts, 1e6);
    EXPECT_EQ(again.model.kappa2(), fit.model.kappa2());
}

TEST(FitSavings, TwoPointsInterpolateExactly) {
    const auto truth = SavingsModel::logistic(1e6, 2e8, -1.1);
    const std::vector<SavingsPoint> pts{{3e4, truth(3e4)}, {7e5, truth(7e5)}};
    const auto fit = fit_savings(pts, 1e6);
    for (const auto& p : pts) {
        EXPECT_NEAR(fit.model(p.wealth) / p.savings, 1.0, 1e-8);
    }
}

TEST(FitSavings, ConstantDataHitsBoundary) {
    const std::vector<SavingsPoint> pts{{1e4, 500.0}, {1e5, 500.0}, {1e6, 500.0}, {1e7, 500.0}};
    EXPECT_THROW(fit_savings(pts, 1e6), FitDidNotConverge<SavingsParams>);
    try {
        fit_savings(pts, 1e6);
    } catch (const FitDidNotConverge<SavingsParams>& e) {
        EXPECT_LE(e.best().kappa3, 0.0);
        EXPECT_GT(e.best().kappa3, -1e-3);
    }
}

TEST(FitSavings, InputErrors) {
    const std::vector<SavingsPoint> one{{1e4, 5.0}};
    EXPECT_THROW(fit_savings(one, 1e6), InsufficientPoints);
    const std::vector<SavingsPoint> neg{{-1.0, 5.0}, {1e4, 6.0}};
    EXPECT_THROW(fit_savings(neg, 1e6), InvalidArgument);
}
