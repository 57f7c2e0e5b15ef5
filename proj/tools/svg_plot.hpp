#pragma once

// Minimal line-chart SVG writer for sweep results. CSV remains the
// canonical output; the plot is a convenience view.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "biad/errors.hpp"
#include "biad/experiments.hpp"

namespace biad::cli {

inline void write_sweep_svg(const SweepResult& sweep, const std::filesystem::path& path) {
    const int width = 640;
    const int height = 400;
    const int left = 60;
    const int right = 20;
    const int top = 30;
    const int bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double x_min = sweep.values.front();
    double x_max = sweep.values.back();
    for (double v : sweep.values) {
        x_min = std::min(x_min, v);
        x_max = std::max(x_max, v);
    }
    if (x_max == x_min) x_max = x_min + 1.0;

    const auto x_of = [&](double v) { return left + (v - x_min) / (x_max - x_min) * plot_w; };
    const auto y_of = [&](double rate) { return top + (1.0 - rate) * plot_h; };

    const auto polyline = [&](auto value_of, const char* color) {
        std::string points;
        char buf[64];
        for (std::size_t i = 0; i < sweep.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x_of(sweep.values[i]),
                          y_of(value_of(sweep.rates[i])));
            points += buf;
        }
        return "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Axes and gridlines at 0, 0.5, 1.
    for (double rate : {0.0, 0.5, 1.0}) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "  <line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#ccc\"/>\n",
                      left, y_of(rate), width - right, y_of(rate));
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "  <text x=\"%d\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%.1f</text>\n",
                      left - 6, y_of(rate) + 4, rate);
        out << buf;
    }
    for (double v : sweep.values) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "  <text x=\"%.1f\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\">%g</text>\n",
                      x_of(v), height - bottom + 18, v);
        out << buf;
    }
    out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << height - bottom << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
        << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
    out << polyline([](const ErrorRates& r) { return r.type_i; }, "#c0392b");
    out << polyline([](const ErrorRates& r) { return r.type_ii; }, "#2980b9");
    out << "  <text x=\"" << left << "\" y=\"18\" font-size=\"14\">error rates vs " << sweep.param
        << "  (red: type I, blue: type II)</text>\n";
    out << "  <text x=\"" << (width - right) / 2 << "\" y=\"" << height - 8
        << "\" font-size=\"13\" text-anchor=\"middle\">" << sweep.param << "</text>\n";
    out << "</svg>\n";
}

}  // namespace biad::cli
