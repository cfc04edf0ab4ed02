#pragma once

// Deterministic SVG 1.1 rendering. Output is a pure function of the data and
// options, so byte-level golden comparisons are valid.

#include "metaaudit/diagnostics.hpp"

#include <string>

namespace metaaudit {

struct SvgOptions {
    int width = 800;
    int height = 600;
    int margin = 50;
    /// Empty means "use the series endpoint" (p-value plot) or "Volcano plot".
    std::string title;
    /// Written into a leading XML comment, e.g. the source table.
    std::string provenance;
};

/// Scatter of (rank, p), a horizontal line at p = alpha and the uniform
/// reference from (0,0) to (m,1). Points are <circle> elements; the two
/// reference lines are the only <line> elements.
std::string render_pplot_svg(const PValuePlotSeries& series, const SvgOptions& options = {});

/// Scatter of (log effect, -log10 p) over an x-range symmetric about zero,
/// with a horizontal line at bonferroni_y.
std::string render_volcano_svg(const VolcanoPlot& plot, const SvgOptions& options = {});

}  // namespace metaaudit
