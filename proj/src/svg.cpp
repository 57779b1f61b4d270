#include "dickeband/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dickeband::io {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

// viridis-like ramp, luminance strictly increasing
const double kRamp[][3] = {
    {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
    {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
    {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.478, 0.821, 0.318},
    {0.741, 0.873, 0.150}, {0.993, 0.906, 0.144}};

std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int n = static_cast<int>(sizeof(kRamp) / sizeof(kRamp[0]));
    const double pos = t * (n - 1);
    const int i = std::min(static_cast<int>(pos), n - 2);
    const double f = pos - i;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(255 * (kRamp[i][0] * (1 - f) + kRamp[i + 1][0] * f)),
                  static_cast<int>(255 * (kRamp[i][1] * (1 - f) + kRamp[i + 1][1] * f)),
                  static_cast<int>(255 * (kRamp[i][2] * (1 - f) + kRamp[i + 1][2] * f)));
    return buf;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

struct Frame {
    double x0, x1, y0, y1;        // data ranges
    int left, right, top, bottom; // pixel margins
    int width, height;

    double px(double x) const {
        return left + (x - x0) / (x1 - x0 + (x1 == x0 ? 1.0 : 0.0)) *
                          (width - left - right);
    }
    double py(double y) const {
        return height - bottom -
               (y - y0) / (y1 - y0 + (y1 == y0 ? 1.0 : 0.0)) *
                   (height - top - bottom);
    }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    if (hi <= lo) return {lo};
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step)
        ticks.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return ticks;
}

void draw_axes(std::ostringstream& svg, const Frame& f, const PlotStyle& style) {
    svg << "<rect x='" << f.left << "' y='" << f.top << "' width='"
        << f.width - f.left - f.right << "' height='" << f.height - f.top - f.bottom
        << "' fill='none' stroke='black' stroke-width='1'/>\n";
    for (double t : nice_ticks(f.x0, f.x1)) {
        const double x = f.px(t);
        svg << "<line x1='" << x << "' y1='" << f.height - f.bottom << "' x2='" << x
            << "' y2='" << f.height - f.bottom + 5 << "' stroke='black'/>\n"
            << "<text x='" << x << "' y='" << f.height - f.bottom + 18
            << "' font-size='11' text-anchor='middle'>" << fmt(t) << "</text>\n";
    }
    for (double t : nice_ticks(f.y0, f.y1)) {
        const double y = f.py(t);
        svg << "<line x1='" << f.left - 5 << "' y1='" << y << "' x2='" << f.left
            << "' y2='" << y << "' stroke='black'/>\n"
            << "<text x='" << f.left - 8 << "' y='" << y + 4
            << "' font-size='11' text-anchor='end'>" << fmt(t) << "</text>\n";
    }
    svg << "<text x='" << (f.left + f.width - f.right) / 2 << "' y='"
        << f.height - 8 << "' font-size='13' text-anchor='middle'>" << style.xlabel
        << "</text>\n";
    svg << "<text x='14' y='" << (f.top + f.height - f.bottom) / 2
        << "' font-size='13' text-anchor='middle' transform='rotate(-90 14 "
        << (f.top + f.height - f.bottom) / 2 << ")'>" << style.ylabel << "</text>\n";
    svg << "<text x='" << f.width / 2 << "' y='18' font-size='15' "
        << "text-anchor='middle'>" << style.title << "</text>\n";
}

}  // namespace

std::string render_line_plot(const std::vector<Series>& series,
                             const PlotStyle& style) {
    if (series.empty()) throw std::invalid_argument("plot: no series");
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].x.size() != series[s].y.size())
            throw std::invalid_argument("plot: x/y length mismatch");
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i]))
                throw std::invalid_argument("plot: non-finite sample in series '" +
                                            series[s].label + "' at index " +
                                            std::to_string(i));
            x0 = std::min(x0, series[s].x[i]);
            x1 = std::max(x1, series[s].x[i]);
            y0 = std::min(y0, series[s].y[i]);
            y1 = std::max(y1, series[s].y[i]);
        }
    }
    if (y0 == y1) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.04 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    Frame f{x0, x1, y0, y1, 64, 20, 30, 48, style.width, style.height};
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << style.width
        << "' height='" << style.height << "' viewBox='0 0 " << style.width << ' '
        << style.height << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    draw_axes(svg, f, style);

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (series[s].x.size() > 1) {
            svg << "<polyline fill='none' stroke='" << color
                << "' stroke-width='1.3' points='";
            for (std::size_t i = 0; i < series[s].x.size(); ++i)
                svg << fmt(f.px(series[s].x[i])) << ',' << fmt(f.py(series[s].y[i]))
                    << ' ';
            svg << "'/>\n";
        }
        if (series[s].markers || series[s].x.size() == 1) {
            for (std::size_t i = 0; i < series[s].x.size(); ++i)
                svg << "<circle cx='" << fmt(f.px(series[s].x[i])) << "' cy='"
                    << fmt(f.py(series[s].y[i])) << "' r='2.2' fill='" << color
                    << "'/>\n";
        }
        if (style.legend) {
            const int ly = f.top + 16 + 16 * static_cast<int>(s);
            svg << "<line x1='" << f.width - f.right - 150 << "' y1='" << ly
                << "' x2='" << f.width - f.right - 120 << "' y2='" << ly
                << "' stroke='" << color << "' stroke-width='2'/>\n"
                << "<text x='" << f.width - f.right - 114 << "' y='" << ly + 4
                << "' font-size='11'>" << series[s].label << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string render_heatmap(const Heatmap& map, const PlotStyle& style) {
    if (map.values.empty() || map.x.empty() || map.y.empty())
        throw std::invalid_argument("heatmap: empty data");
    double v0 = 1e300, v1 = -1e300;
    for (std::size_t r = 0; r < map.values.size(); ++r) {
        if (map.values[r].size() != map.x.size())
            throw std::invalid_argument("heatmap: ragged rows");
        for (std::size_t c = 0; c < map.values[r].size(); ++c) {
            const double v = map.values[r][c];
            if (!std::isfinite(v))
                throw std::invalid_argument("heatmap: non-finite value at row " +
                                            std::to_string(r) + " col " +
                                            std::to_string(c));
            v0 = std::min(v0, v);
            v1 = std::max(v1, v);
        }
    }
    if (v1 == v0) v1 = v0 + 1.0;

    Frame f{map.x.front(), map.x.back(), map.y.front(), map.y.back(),
            64, 70, 30, 48, style.width, style.height};
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << style.width
        << "' height='" << style.height << "' viewBox='0 0 " << style.width << ' '
        << style.height << "'>\n<rect width='100%' height='100%' fill='white'/>\n";

    const std::size_t rows = map.values.size(), cols = map.x.size();
    for (std::size_t r = 0; r < rows; ++r) {
        const double yc0 = f.py(r == 0 ? map.y[0] : 0.5 * (map.y[r - 1] + map.y[r]));
        const double yc1 =
            f.py(r + 1 == rows ? map.y[rows - 1] : 0.5 * (map.y[r] + map.y[r + 1]));
        for (std::size_t c = 0; c < cols; ++c) {
            const double xc0 =
                f.px(c == 0 ? map.x[0] : 0.5 * (map.x[c - 1] + map.x[c]));
            const double xc1 =
                f.px(c + 1 == cols ? map.x[cols - 1] : 0.5 * (map.x[c] + map.x[c + 1]));
            svg << "<rect x='" << fmt(xc0) << "' y='" << fmt(yc1) << "' width='"
                << fmt(xc1 - xc0 + 0.5) << "' height='" << fmt(yc0 - yc1 + 0.5)
                << "' fill='" << ramp_color((map.values[r][c] - v0) / (v1 - v0))
                << "'/>\n";
        }
    }
    draw_axes(svg, f, style);

    // color bar
    const int bar_x = style.width - 52, bar_top = f.top,
              bar_h = style.height - f.top - f.bottom;
    for (int i = 0; i < bar_h; ++i)
        svg << "<rect x='" << bar_x << "' y='" << bar_top + bar_h - 1 - i
            << "' width='14' height='1.5' fill='"
            << ramp_color(static_cast<double>(i) / (bar_h - 1)) << "'/>\n";
    svg << "<text x='" << bar_x + 18 << "' y='" << bar_top + 10
        << "' font-size='10'>" << fmt(v1) << "</text>\n"
        << "<text x='" << bar_x + 18 << "' y='" << bar_top + bar_h
        << "' font-size='10'>" << fmt(v0) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace dickeband::io
