// svg.hpp — self-contained SVG line plots and heatmaps, no external renderer.

#pragma once

#include <string>
#include <vector>

namespace dickeband::io {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers{false};  // draw point markers in addition to the line
};

struct PlotStyle {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    int width{860};
    int height{520};
    bool legend{true};
};

// Rejects non-finite data, reporting the series and sample index.
std::string render_line_plot(const std::vector<Series>& series, const PlotStyle& style);

struct Heatmap {
    std::vector<double> x;                   // column coordinates
    std::vector<double> y;                   // row coordinates
    std::vector<std::vector<double>> values; // values[row][col]
};

// Monotone-luminance colormap.
std::string render_heatmap(const Heatmap& map, const PlotStyle& style);

}  // namespace dickeband::io
