#pragma once

// Deterministic SVG rendering of phase-diagram scans: one filled rect per
// grid node, region colors red/orange/yellow/black, fixed legend.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ghzkit/mixtures.hpp"

namespace ghzkit {

namespace detail {

inline std::string fmt_px(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.8g", v);
    return buf;
}

inline void svg_rect(std::string& out, double x, double y, double w, double h,
                     const std::string& fill) {
    out += "<rect x=\"" + fmt_px(x) + "\" y=\"" + fmt_px(y) + "\" width=\"" + fmt_px(w) +
           "\" height=\"" + fmt_px(h) + "\" fill=\"" + fill + "\"/>\n";
}

inline void svg_text(std::string& out, double x, double y, int size, const std::string& text) {
    out += "<text x=\"" + fmt_px(x) + "\" y=\"" + fmt_px(y) +
           "\" font-family=\"monospace\" font-size=\"" + std::to_string(size) + "\">" + text +
           "</text>\n";
}

inline void svg_legend(std::string& out, double x, double y) {
    const RegionClass classes[] = {RegionClass::GME, RegionClass::NOT3SEP, RegionClass::NOT4SEP,
                                   RegionClass::UNDETECTED};
    for (int k = 0; k < 4; ++k) {
        double row = y + 22.0 * k;
        svg_rect(out, x, row, 14.0, 14.0, region_color(classes[k]));
        svg_text(out, x + 20.0, row + 12.0, 13, region_name(classes[k]));
    }
}

inline std::string svg_open(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_px(width) + "\" height=\"" +
           fmt_px(height) + "\" viewBox=\"0 0 " + fmt_px(width) + " " + fmt_px(height) + "\">\n";
}

}  // namespace detail

// Right-triangle raster over (alpha, beta), alpha right, beta up.
inline std::string phase_diagram_svg_binary(const std::vector<ScanCell>& cells, int resolution,
                                            const std::string& title) {
    const double plot = 520.0, mx = 60.0, my = 40.0;
    const double cell = plot / resolution;
    const double width = mx + plot + 180.0, height = my + plot + 60.0;
    std::string out = detail::svg_open(width, height);
    detail::svg_text(out, mx, my - 14.0, 15, title);
    for (const ScanCell& c : cells) {
        double x = mx + c.alpha * plot - 0.5 * cell;
        double y = my + (1.0 - c.beta) * plot - 0.5 * cell;
        detail::svg_rect(out, x, y, cell, cell, region_color(c.region));
    }
    detail::svg_text(out, mx + plot / 2.0 - 20.0, my + plot + 40.0, 14, "alpha");
    detail::svg_text(out, mx - 50.0, my + plot / 2.0, 14, "beta");
    detail::svg_text(out, mx - 4.0, my + plot + 18.0, 12, "0");
    detail::svg_text(out, mx + plot - 4.0, my + plot + 18.0, 12, "1");
    detail::svg_text(out, mx - 16.0, my + plot + 4.0, 12, "0");
    detail::svg_text(out, mx - 16.0, my + 10.0, 12, "1");
    detail::svg_legend(out, mx + plot + 40.0, my + 10.0);
    out += "</svg>\n";
    return out;
}

// One triangular panel per noise slice, panels laid out on a grid; within a
// panel nodes sit at barycentric positions alpha*A + beta*B + gamma*C with
// A bottom-left, B bottom-right, C top.
inline std::string phase_diagram_svg_ternary(const std::vector<ScanCell>& cells, int resolution,
                                             const std::string& title) {
    const double panel = 150.0, pad = 34.0, mx = 40.0, my = 56.0;
    const int nslices = resolution + 1;
    const int ncols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nslices))));
    const int nrows = (nslices + ncols - 1) / ncols;
    const double width = mx + ncols * (panel + pad) + 160.0;
    const double height = my + nrows * (panel + pad) + 20.0;
    const double cell = panel / resolution;
    const double hfac = std::sqrt(3.0) / 2.0;
    std::string out = detail::svg_open(width, height);
    detail::svg_text(out, mx, my - 30.0, 15, title);
    for (int w = 0; w < nslices; ++w) {
        int col = w % ncols, row = w / ncols;
        double px = mx + col * (panel + pad);
        double py = my + row * (panel + pad);
        detail::svg_text(out, px, py - 6.0, 11,
                         "noise=" + format_g12(static_cast<double>(w) / resolution));
    }
    for (const ScanCell& c : cells) {
        int w = static_cast<int>(std::llround(c.noise * resolution));
        int col = w % ncols, row = w / ncols;
        double px = mx + col * (panel + pad);
        double py = my + row * (panel + pad);
        double bx = c.beta * panel + c.gamma * 0.5 * panel;
        double by = c.gamma * hfac * panel;
        detail::svg_rect(out, px + bx - 0.5 * cell, py + panel - by - 0.5 * cell, cell, cell,
                         region_color(c.region));
    }
    detail::svg_legend(out, width - 140.0, my);
    out += "</svg>\n";
    return out;
}

}  // namespace ghzkit
