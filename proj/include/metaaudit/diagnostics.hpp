#pragma once

// Rank-ordered p-value plots, volcano plots and the shape statistics used to
// read them. The KS and two-segment statistics are diagnostics added on top
// of the visual reading; outputs label them "diagnostic (non-paper)".

#include "metaaudit/stat_core.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace metaaudit {

inline constexpr const char* kDiagnosticLabel = "diagnostic (non-paper)";

/// One reported p-value.
struct PValueRecord {
    std::int64_t citation = 0;
    std::string author;
    std::string endpoint;
    double p = 1.0;
    /// Underlying ratio estimate was below 1.
    bool direction_negative = false;
    /// Source reported "<p" rather than an exact value.
    bool truncated = false;

    friend bool operator==(const PValueRecord&, const PValueRecord&) = default;
};

struct PlotPoint {
    std::int64_t rank = 0;
    double p = 0.0;
    std::int64_t citation = 0;
};

struct PValuePlotSeries {
    std::string endpoint;
    std::vector<PlotPoint> points;
    std::size_t m = 0;
    double frac_le_alpha = 0.0;
    double alpha = 0.05;
};

/// Filters to `endpoint`, sorts by (p, citation), ranks 1..m.
/// Throws EmptySeriesError when nothing matches.
PValuePlotSeries build_pplot(std::span<const PValueRecord> records, const std::string& endpoint,
                             double alpha = 0.05);

/// Same construction from bare p-values (citations are the input positions).
PValuePlotSeries build_pplot(std::span<const double> pvalues, const std::string& label,
                             double alpha = 0.05);

struct KsResult {
    double d_stat = 0.0;
    double p_ks = 1.0;
};

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^(k-1) e^(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

/// One-sample KS test of the series p-values against Uniform(0,1).
/// Requires m >= 5.
KsResult uniformity_ks(const PValuePlotSeries& series);

struct BilinearFit {
    /// Last rank of the left segment.
    std::int64_t breakpoint_rank = 0;
    double sse_two_segment = 0.0;
    double sse_one_segment = 0.0;
    /// sse_two_segment / sse_one_segment; 1 when a single line is already exact.
    double ratio = 1.0;
};

/// Exhaustive two-segment least-squares fit of p against rank. Breakpoints
/// 2..m-2; each side gets its own line. Requires m >= 6.
BilinearFit bilinearity_fit(const PValuePlotSeries& series);

struct VolcanoPoint {
    std::string label;
    double effect = 0.0;       // natural-log effect size
    double neg_log10_p = 0.0;
};

struct VolcanoPlot {
    std::vector<VolcanoPoint> points;
    double bonferroni_y = 0.0;
};

VolcanoPlot build_volcano(std::span<const EffectEstimate> estimates, double alpha,
                          std::int64_t m_tests);

struct EndpointStats {
    std::size_t count = 0;
    double min_p = 1.0;
    double max_p = 0.0;
};

/// Per-endpoint count and p-value range, keyed by endpoint name.
std::map<std::string, EndpointStats> descriptives(std::span<const PValueRecord> records);

}  // namespace metaaudit
