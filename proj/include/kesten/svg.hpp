// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Minimal self-contained SVG line and scatter plots, linear or log-log.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kesten/errors.hpp"

namespace kesten::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool markers = true;  // scatter points; otherwise a polyline
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
    std::optional<double> y_min;  // clamp for the visible range
    std::optional<double> y_max;
};

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 480.0;
inline constexpr double kLeft = 80.0;
inline constexpr double kRight = 20.0;
inline constexpr double kTop = 40.0;
inline constexpr double kBottom = 60.0;

namespace detail {

inline std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double transform(double v) const { return log ? std::log10(v) : v; }
};

inline Axis make_axis(const std::vector<double>& values, bool log, std::optional<double> lo_clamp,
                      std::optional<double> hi_clamp) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v) || (log && !(v > 0.0))) {
            continue;
        }
        if (lo_clamp && v < *lo_clamp) {
            continue;
        }
        if (hi_clamp && v > *hi_clamp) {
            continue;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) {
        lo = log ? 1.0 : 0.0;
        hi = log ? 10.0 : 1.0;
    }
    Axis a;
    a.log = log;
    if (log) {
        a.lo = std::floor(std::log10(lo));
        a.hi = std::ceil(std::log10(hi));
        if (a.hi <= a.lo) {
            a.hi = a.lo + 1.0;
        }
    } else {
        const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1e-12, 0.5 * std::abs(lo) + 0.5);
        a.lo = lo - pad;
        a.hi = hi + pad;
    }
    return a;
}

}  // namespace detail

inline std::string render(const Plot& plot) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& s : plot.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const auto ax = detail::make_axis(xs, plot.log_x, std::nullopt, std::nullopt);
    const auto ay = detail::make_axis(ys, plot.log_y, plot.y_min, plot.y_max);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double v) { return kTop + ph - (ay.transform(v) - ay.lo) / (ay.hi - ay.lo) * ph; };
    auto visible = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y) || (plot.log_x && !(x > 0.0)) || (plot.log_y && !(y > 0.0))) {
            return false;
        }
        const double tx = ax.transform(x);
        const double ty = ay.transform(y);
        return tx >= ax.lo - 1e-9 && tx <= ax.hi + 1e-9 && ty >= ay.lo - 1e-9 && ty <= ay.hi + 1e-9;
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << detail::esc(plot.title)
       << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto ticks = [](const detail::Axis& a) {
        std::vector<double> t;
        if (a.log) {
            const int step = std::max(1, static_cast<int>(std::ceil((a.hi - a.lo) / 10.0)));
            for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += step) {
                t.push_back(e);
            }
        } else {
            const double raw = (a.hi - a.lo) / 6.0;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            const double step = raw / mag < 2.0 ? 2.0 * mag : raw / mag < 5.0 ? 5.0 * mag : 10.0 * mag;
            for (double v = std::ceil(a.lo / step) * step; v <= a.hi; v += step) {
                t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
            }
        }
        return t;
    };
    auto label = [](const detail::Axis& a, double t) {
        return a.log ? "10<tspan dy=\"-6\" font-size=\"9\">" + detail::num(t) + "</tspan>" : detail::num(t);
    };
    for (double t : ticks(ax)) {
        const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
        os << "<line class=\"tick-x\" x1=\"" << x << "\" y1=\"" << kTop + ph << "\" x2=\"" << x << "\" y2=\""
           << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
        os << "<text class=\"tick-x\"" << (ax.log ? " data-decade=\"" + detail::num(t) + "\"" : std::string{}) << " x=\""
           << x << "\" y=\"" << kTop + ph + 20 << "\" text-anchor=\"middle\">" << label(ax, t) << "</text>\n";
    }
    for (double t : ticks(ay)) {
        const double y = kTop + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
        os << "<line class=\"tick-y\" x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft << "\" y2=\"" << y
           << "\" stroke=\"black\"/>\n";
        os << "<text class=\"tick-y\"" << (ay.log ? " data-decade=\"" + detail::num(t) + "\"" : std::string{}) << " x=\""
           << kLeft - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << label(ay, t) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
       << detail::esc(plot.x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::esc(plot.y_label) << "</text>\n";

    double legend_y = kTop + 16;
    for (const auto& s : plot.series) {
        if (s.markers) {
            os << "<g class=\"series\" fill=\"" << s.color << "\">\n";
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (visible(s.x[i], s.y[i])) {
                    os << "<circle cx=\"" << detail::num(px(s.x[i])) << "\" cy=\"" << detail::num(py(s.y[i]))
                       << "\" r=\"1.5\"/>\n";
                }
            }
            os << "</g>\n";
        } else {
            os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (visible(s.x[i], s.y[i])) {
                    os << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i])) << ' ';
                }
            }
            os << "\"/>\n";
        }
        if (!s.label.empty()) {
            os << "<rect x=\"" << kLeft + pw - 170 << "\" y=\"" << legend_y - 9 << "\" width=\"10\" height=\"10\" fill=\""
               << s.color << "\"/>\n";
            os << "<text x=\"" << kLeft + pw - 155 << "\" y=\"" << legend_y << "\">" << detail::esc(s.label) << "</text>\n";
            legend_y += 16;
        }
    }
    os << "</svg>\n";
    return os.str();
}

/// Distinct colors for up to eight series, then repeating.
inline std::string palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    return colors[i % 8];
}

}  // namespace kesten::svg
