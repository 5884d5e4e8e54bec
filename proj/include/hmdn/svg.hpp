// Minimal SVG scatter plot of one prediction: room outline, the M sampled
// candidates, the N selected ones, the true position, and both estimates.
//
// Point marks are <circle> elements with class "candidate", "selected" or
// "truth"; estimates are drawn as crosses (<path>), so a plot holds exactly
// M + N + 1 circles.
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "hmdn/hmdn.hpp"

namespace hmdn {

struct PlotFrame {
    double width = 17.0;  // meters
    double depth = 10.0;
    double pixels_per_meter = 40.0;
    double margin = 30.0;
};

inline void write_plot_svg(std::ostream& out, const PlotFrame& f, const DumpRecord& r) {
    const double w = f.width * f.pixels_per_meter + 2 * f.margin;
    const double h = f.depth * f.pixels_per_meter + 2 * f.margin + 20;
    // SVG y grows downwards; flip so the room's y axis points up.
    auto px = [&](double x) { return f.margin + x * f.pixels_per_meter; };
    auto py = [&](double y) { return f.margin + 20 + (f.depth - y) * f.pixels_per_meter; };
    char buf[256];
    auto emit = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out << buf;
    };

    emit("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n", w, h,
         w, h);
    out << "<title>record " << r.id << " (" << r.condition << ")</title>\n";
    out << "<style>.candidate{fill:#1f77b4;fill-opacity:0.5}.selected{fill:#2ca02c}.truth{fill:#d62728}"
           ".est{stroke-width:2;fill:none}</style>\n";
    emit("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"14\">", f.margin, f.margin);
    out << "record " << r.id << ", " << r.condition << ": blue = candidates, green = selected, red = truth</text>\n";
    emit("<rect class=\"room\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n",
         px(0), py(f.depth), f.width * f.pixels_per_meter, f.depth * f.pixels_per_meter);

    std::vector<bool> is_selected(r.result.candidates.size(), false);
    for (auto i : r.result.selected) is_selected[i] = true;
    for (std::size_t i = 0; i < r.result.candidates.size(); ++i) {
        const auto& c = r.result.candidates[i];
        emit("<circle class=\"candidate\" cx=\"%.2f\" cy=\"%.2f\" r=\"3\"/>\n", px(c[0]), py(c[1]));
    }
    for (auto i : r.result.selected) {
        const auto& c = r.result.candidates[i];
        emit("<circle class=\"selected\" cx=\"%.2f\" cy=\"%.2f\" r=\"3.5\"/>\n", px(c[0]), py(c[1]));
    }
    if (r.truth.size() >= 2 && std::isfinite(r.truth[0]) && std::isfinite(r.truth[1])) {
        emit("<circle class=\"truth\" cx=\"%.2f\" cy=\"%.2f\" r=\"5\"/>\n", px(r.truth[0]), py(r.truth[1]));
    }
    auto cross = [&](const Vector& p, const char* color, const char* label) {
        if (p.size() < 2) return;
        const double x = px(p[0]), y = py(p[1]);
        emit("<path class=\"est %s\" stroke=\"%s\" d=\"M%.2f %.2fL%.2f %.2fM%.2f %.2fL%.2f %.2f\"/>\n", label, color,
             x - 6, y - 6, x + 6, y + 6, x - 6, y + 6, x + 6, y - 6);
    };
    cross(r.baseline, "#1f77b4", "baseline");
    cross(r.result.estimate, "#2ca02c", "hmdn");
    out << "</svg>\n";
}

inline void save_plot_svg(const std::string& path, const PlotFrame& f, const DumpRecord& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open plot file for writing: " + path);
    write_plot_svg(out, f, r);
}

}  // namespace hmdn
