#include "metaaudit/diagnostics.hpp"

#include "metaaudit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace metaaudit {

namespace {

void check_p(double p, const std::string& where) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw ValidationError(where + ": p-value must lie in (0,1]");
    }
}

PValuePlotSeries finish_series(std::string endpoint, std::vector<PlotPoint> pts, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
    std::stable_sort(pts.begin(), pts.end(), [](const PlotPoint& a, const PlotPoint& b) {
        if (a.p != b.p) return a.p < b.p;
        return a.citation < b.citation;
    });
    std::size_t below = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        pts[i].rank = static_cast<std::int64_t>(i + 1);
        if (pts[i].p <= alpha) ++below;
    }
    PValuePlotSeries s;
    s.endpoint = std::move(endpoint);
    s.m = pts.size();
    s.frac_le_alpha = static_cast<double>(below) / static_cast<double>(s.m);
    s.alpha = alpha;
    s.points = std::move(pts);
    return s;
}

// Residual sum of squares of the least-squares line through points
// [first, last) of (rank, p).
double line_sse(const std::vector<PlotPoint>& pts, std::size_t first, std::size_t last) {
    const auto n = static_cast<double>(last - first);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        mx += static_cast<double>(pts[i].rank);
        my += pts[i].p;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const double dx = static_cast<double>(pts[i].rank) - mx;
        sxx += dx * dx;
        sxy += dx * (pts[i].p - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    double sse = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const double r = pts[i].p - (my + slope * (static_cast<double>(pts[i].rank) - mx));
        sse += r * r;
    }
    return sse;
}

}  // namespace

PValuePlotSeries build_pplot(std::span<const PValueRecord> records, const std::string& endpoint,
                             double alpha) {
    std::vector<PlotPoint> pts;
    for (const auto& r : records) {
        if (r.endpoint != endpoint) continue;
        check_p(r.p, "citation " + std::to_string(r.citation));
        pts.push_back({0, r.p, r.citation});
    }
    if (pts.empty()) throw EmptySeriesError("no p-values for endpoint '" + endpoint + "'");
    return finish_series(endpoint, std::move(pts), alpha);
}

PValuePlotSeries build_pplot(std::span<const double> pvalues, const std::string& label,
                             double alpha) {
    if (pvalues.empty()) throw EmptySeriesError("no p-values for '" + label + "'");
    std::vector<PlotPoint> pts;
    pts.reserve(pvalues.size());
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
        check_p(pvalues[i], label);
        pts.push_back({0, pvalues[i], static_cast<std::int64_t>(i + 1)});
    }
    return finish_series(label, std::move(pts), alpha);
}

double kolmogorov_sf(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-transformed form converges fast for small lambda.
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * c);
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult uniformity_ks(const PValuePlotSeries& series) {
    const std::size_t m = series.points.size();
    if (m < 5) {
        throw InsufficientDataError("uniformity_ks: need at least 5 p-values, got " +
                                    std::to_string(m));
    }
    std::vector<double> p;
    p.reserve(m);
    for (const auto& pt : series.points) p.push_back(pt.p);
    std::sort(p.begin(), p.end());
    const auto n = static_cast<double>(m);
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double f = std::clamp(p[i], 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    // Stephens' effective-n form of the sqrt(m) scaling.
    const double rn = std::sqrt(n);
    return {d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)};
}

BilinearFit bilinearity_fit(const PValuePlotSeries& series) {
    const std::size_t m = series.points.size();
    if (m < 6) {
        throw InsufficientDataError("bilinearity_fit: need at least 6 p-values, got " +
                                    std::to_string(m));
    }
    const auto& pts = series.points;
    BilinearFit fit;
    fit.sse_one_segment = line_sse(pts, 0, m);
    fit.sse_two_segment = fit.sse_one_segment;
    bool first = true;
    for (std::size_t b = 2; b <= m - 2; ++b) {
        const double sse = line_sse(pts, 0, b) + line_sse(pts, b, m);
        if (first || sse < fit.sse_two_segment) {
            fit.sse_two_segment = sse;
            fit.breakpoint_rank = pts[b - 1].rank;
            first = false;
        }
    }

    double mean = 0.0;
    for (const auto& pt : pts) mean += pt.p;
    mean /= static_cast<double>(m);
    double total = 0.0;
    for (const auto& pt : pts) total += (pt.p - mean) * (pt.p - mean);

    // A line that already interpolates leaves nothing for a second segment
    // to explain; the ratio of two rounding residues is meaningless.
    if (fit.sse_one_segment <= 1e-12 * total || total == 0.0) {
        fit.ratio = 1.0;
    } else {
        fit.ratio = std::clamp(fit.sse_two_segment / fit.sse_one_segment, 0.0, 1.0);
    }
    return fit;
}

VolcanoPlot build_volcano(std::span<const EffectEstimate> estimates, double alpha,
                          std::int64_t m_tests) {
    if (estimates.empty()) throw ValidationError("build_volcano: no estimates");
    VolcanoPlot v;
    v.bonferroni_y = bonferroni_line(alpha, m_tests).neg_log10;
    v.points.reserve(estimates.size());
    for (const auto& e : estimates) {
        const auto b = p_from_estimate(e);
        v.points.push_back({e.label, b.log_effect, neg_log10(b.p)});
    }
    return v;
}

std::map<std::string, EndpointStats> descriptives(std::span<const PValueRecord> records) {
    std::map<std::string, EndpointStats> out;
    for (const auto& r : records) {
        auto [it, inserted] = out.try_emplace(r.endpoint, EndpointStats{0, r.p, r.p});
        auto& s = it->second;
        ++s.count;
        s.min_p = std::min(s.min_p, r.p);
        s.max_p = std::max(s.max_p, r.p);
    }
    return out;
}

}  // namespace metaaudit
