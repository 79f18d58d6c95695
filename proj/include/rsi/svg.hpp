#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rsi/common.hpp"

namespace rsi {

// Minimal SVG line-plot writer: enough for the experiment reports (possibly
// log-scaled axes, a handful of series), no plotting dependency.

struct PlotSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x, y;
};

struct PlotSpec {
    std::string title;
    std::string x_label, y_label;
    bool log_x = false, log_y = false;
    int width = 720, height = 480;
};

inline void write_svg_plot(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    std::ofstream out(path);
    if (!out) throw domain_error("write_svg_plot: cannot open " + path);
    auto tx = [&](double v) { return spec.log_x ? std::log10(std::max(v, 1e-300)) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(std::max(v, 1e-300)) : v; };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x0 <= x1)) {
        x0 = 0;
        x1 = 1;
    }
    if (!(y0 <= y1)) {
        y0 = 0;
        y1 = 1;
    }
    if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
    const double ml = 64, mr = 16, mt = 32, mb = 48;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    char buf[512];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#444\"/>\n", ml,
                  mt, pw, ph);
    out << buf;
    out << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << spec.title
        << "</text>\n";
    out << "<text x=\"" << spec.width / 2 << "\" y=\"" << spec.height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << spec.x_label << (spec.log_x ? " (log10)" : "")
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << spec.height / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << spec.height / 2 << ")\">"
        << spec.y_label << (spec.log_y ? " (log10)" : "") << "</text>\n";
    // axis ticks: 5 per axis at round positions in transformed coordinates
    for (int i = 0; i <= 4; ++i) {
        const double gx = x0 + (x1 - x0) * i / 4.0;
        const double gy = y0 + (y1 - y0) * i / 4.0;
        const double sx = ml + pw * i / 4.0;
        const double sy = mt + ph - ph * i / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ccc\"/>\n", sx, mt, sx, mt + ph);
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ccc\"/>\n", ml, sy, ml + pw, sy);
        out << buf;
        std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"10\">%.3g</text>\n",
                      sx, mt + ph + 14.0, gx);
        out << buf;
        std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"10\">%.3g</text>\n",
                      ml - 4.0, sy + 3.0, gy);
        out << buf;
    }
    int legend_row = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
            out << buf;
        }
        out << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", px(s.x[i]),
                          py(s.y[i]), s.color.c_str());
            out << buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" fill=\"%s\">%s</text>\n", ml + 8.0,
                      mt + 16.0 + 14.0 * legend_row, s.color.c_str(), s.label.c_str());
        out << buf;
        ++legend_row;
    }
    out << "</svg>\n";
}

}  // namespace rsi
