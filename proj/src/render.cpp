#include "metaaudit/render.hpp"

#include "metaaudit/errors.hpp"
#include "metaaudit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace metaaudit {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// "--" may not appear inside an XML comment.
std::string comment_safe(std::string s) {
    for (auto pos = s.find("--"); pos != std::string::npos; pos = s.find("--", pos)) {
        s.replace(pos, 2, "- -");
    }
    return s;
}

std::string num(double v) { return format_fixed(v, 2); }

// Linear map from data space onto the plotting frame.
struct Frame {
    double left, right, top, bottom;
    double x0, x1, y0, y1;

    double x(double v) const { return left + (v - x0) / (x1 - x0) * (right - left); }
    double y(double v) const { return bottom - (v - y0) / (y1 - y0) * (bottom - top); }
};

Frame make_frame(const SvgOptions& o, double x0, double x1, double y0, double y1) {
    if (o.width <= 2 * o.margin || o.height <= 2 * o.margin) {
        throw ValidationError("svg: canvas too small for its margins");
    }
    return {static_cast<double>(o.margin), static_cast<double>(o.width - o.margin),
            static_cast<double>(o.margin), static_cast<double>(o.height - o.margin),
            x0, x1, y0, y1};
}

void open_document(std::ostringstream& out, const SvgOptions& o, const std::string& title) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!o.provenance.empty()) out << "<!-- " << comment_safe(o.provenance) << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << o.width
        << "\" height=\"" << o.height << "\" viewBox=\"0 0 " << o.width << ' ' << o.height
        << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << o.width << "\" height=\"" << o.height
        << "\" fill=\"white\"/>\n";
    out << "<text class=\"title\" x=\"" << num(o.width / 2.0) << "\" y=\""
        << num(o.margin / 2.0 + 6.0) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << xml_escape(title) << "</text>\n";
}

void axis_labels(std::ostringstream& out, const Frame& f, const SvgOptions& o,
                 const std::string& xlabel, const std::string& ylabel) {
    out << "<text class=\"xlabel\" x=\"" << num((f.left + f.right) / 2.0) << "\" y=\""
        << num(o.height - 8.0) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\">" << xml_escape(xlabel) << "</text>\n";
    out << "<text class=\"ylabel\" x=\"14\" y=\"" << num((f.top + f.bottom) / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 14 " << num((f.top + f.bottom) / 2.0) << ")\">"
        << xml_escape(ylabel) << "</text>\n";
}

void tick(std::ostringstream& out, double x, double y, const std::string& label, bool on_x) {
    if (on_x) {
        out << "<path class=\"tick\" d=\"M" << num(x) << ',' << num(y) << " v5\" stroke=\"black\"/>"
            << "<text class=\"tick-label\" x=\"" << num(x) << "\" y=\"" << num(y + 17.0)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << xml_escape(label) << "</text>\n";
    } else {
        out << "<path class=\"tick\" d=\"M" << num(x) << ',' << num(y) << " h-5\" stroke=\"black\"/>"
            << "<text class=\"tick-label\" x=\"" << num(x - 8.0) << "\" y=\"" << num(y + 4.0)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << xml_escape(label) << "</text>\n";
    }
}

void ref_line(std::ostringstream& out, const char* cls, double x1, double y1, double x2,
              double y2, const char* colour, const char* dash) {
    out << "<line class=\"" << cls << "\" x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\""
        << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
    if (dash != nullptr) out << " stroke-dasharray=\"" << dash << '"';
    out << "/>\n";
}

std::string trim_zeros(std::string s) {
    if (s.find('.') == std::string::npos) return s;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

}  // namespace

std::string render_pplot_svg(const PValuePlotSeries& series, const SvgOptions& options) {
    if (series.points.empty()) throw EmptySeriesError("render_pplot_svg: empty series");
    const double m = static_cast<double>(series.points.size());
    const Frame f = make_frame(options, 0.0, m, 0.0, 1.0);
    const std::string title = options.title.empty() ? series.endpoint : options.title;

    std::ostringstream out;
    open_document(out, options, title);
    out << "<path class=\"axes\" d=\"M" << num(f.left) << ',' << num(f.top) << " V" << num(f.bottom)
        << " H" << num(f.right) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double p = i / 4.0;
        tick(out, f.left, f.y(p), trim_zeros(format_fixed(p, 2)), false);
    }
    const auto m_int = static_cast<std::int64_t>(series.points.size());
    const std::int64_t step = std::max<std::int64_t>(1, (m_int + 4) / 5);
    for (std::int64_t r = 0; r <= m_int; r += step) {
        tick(out, f.x(static_cast<double>(r)), f.bottom, std::to_string(r), true);
    }
    axis_labels(out, f, options, "Rank", "p-value");

    ref_line(out, "ref-alpha", f.x(0.0), f.y(series.alpha), f.x(m), f.y(series.alpha), "black",
             nullptr);
    ref_line(out, "ref-uniform", f.x(0.0), f.y(0.0), f.x(m), f.y(1.0), "gray", "6,4");

    for (const auto& pt : series.points) {
        out << "<circle cx=\"" << num(f.x(static_cast<double>(pt.rank))) << "\" cy=\""
            << num(f.y(pt.p)) << "\" r=\"4\" fill=\"steelblue\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_volcano_svg(const VolcanoPlot& plot, const SvgOptions& options) {
    if (plot.points.empty()) throw ValidationError("render_volcano_svg: no points");
    double max_abs_x = 0.0;
    double max_y = std::max(0.0, plot.bonferroni_y);
    for (const auto& pt : plot.points) {
        max_abs_x = std::max(max_abs_x, std::abs(pt.effect));
        max_y = std::max(max_y, pt.neg_log10_p);
    }
    const double xr = max_abs_x > 0.0 ? max_abs_x * 1.1 : 1.0;
    const double yr = max_y > 0.0 ? max_y * 1.1 : 1.0;
    const Frame f = make_frame(options, -xr, xr, 0.0, yr);
    const std::string title = options.title.empty() ? std::string("Volcano plot") : options.title;

    std::ostringstream out;
    open_document(out, options, title);
    out << "<path class=\"axes\" d=\"M" << num(f.left) << ',' << num(f.top) << " V" << num(f.bottom)
        << " H" << num(f.right) << " M" << num(f.x(0.0)) << ',' << num(f.bottom) << " V"
        << num(f.top) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    for (int i = -2; i <= 2; ++i) {
        const double v = xr * i / 2.0;
        tick(out, f.x(v), f.bottom, trim_zeros(format_fixed(v, 3)), true);
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = yr * i / 4.0;
        tick(out, f.left, f.y(v), trim_zeros(format_fixed(v, 2)), false);
    }
    axis_labels(out, f, options, "ln(effect)", "-log10(p)");

    ref_line(out, "ref-bonferroni", f.left, f.y(plot.bonferroni_y), f.right,
             f.y(plot.bonferroni_y), "firebrick", "6,4");

    for (const auto& pt : plot.points) {
        const double cx = f.x(pt.effect);
        const double cy = f.y(pt.neg_log10_p);
        out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy)
            << "\" r=\"4\" fill=\"steelblue\"/>\n";
        if (!pt.label.empty()) {
            out << "<text class=\"point-label\" x=\"" << num(cx + 6.0) << "\" y=\"" << num(cy - 6.0)
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(pt.label)
                << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace metaaudit
