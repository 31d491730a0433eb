#include "pmono/plot.hpp"

#include "pmono/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pmono {

namespace {

std::string escape(const std::string& s) {
    std::string out;
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

/// Round step for about `target` ticks across [lo, hi].
double nice_step(double lo, double hi, int target) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (const double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(4) << x;
    return os.str();
}

}  // namespace

void write_svg_plot(std::ostream& out, const std::vector<double>& t,
                    const std::vector<PlotSeries>& series, const PlotOptions& options) {
    if (t.empty()) throw ConfigError("plot: no samples");
    if (series.empty()) throw ConfigError("plot: no series");
    for (const auto& s : series) {
        if (s.values.size() != t.size()) throw DimensionError("plot: series length mismatch");
    }

    double x_lo = *std::min_element(t.begin(), t.end());
    double x_hi = *std::max_element(t.begin(), t.end());
    double y_lo = series[0].values[0];
    double y_hi = y_lo;
    for (const auto& s : series) {
        for (const double v : s.values) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    if (y_hi == y_lo) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double left = 70, right = 20, top = options.title.empty() ? 20 : 40, bottom = 50;
    const double w = options.width - left - right;
    const double h = options.height - top - bottom;
    const auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * w; };
    const auto sy = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * h; };

    static constexpr std::array<const char*, 6> colors = {"#000000", "#1f77b4", "#d62728",
                                                          "#2ca02c", "#9467bd", "#ff7f0e"};

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
        << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' '
        << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!options.title.empty()) {
        out << "<text x=\"" << options.width / 2 << "\" y=\"24\" text-anchor=\"middle\">"
            << escape(options.title) << "</text>\n";
    }

    // Grid and ticks.
    const double xs = nice_step(x_lo, x_hi, 8);
    for (double x = std::ceil(x_lo / xs) * xs; x <= x_hi + 1e-12 * xs; x += xs) {
        out << "<line x1=\"" << sx(x) << "\" y1=\"" << top << "\" x2=\"" << sx(x) << "\" y2=\""
            << top + h << "\" stroke=\"#e0e0e0\" stroke-width=\"0.5\"/>\n";
        out << "<text x=\"" << sx(x) << "\" y=\"" << top + h + 16
            << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
    }
    const double ys = nice_step(y_lo, y_hi, 6);
    for (double y = std::ceil(y_lo / ys) * ys; y <= y_hi + 1e-12 * ys; y += ys) {
        out << "<line x1=\"" << left << "\" y1=\"" << sy(y) << "\" x2=\"" << left + w
            << "\" y2=\"" << sy(y) << "\" stroke=\"#e0e0e0\" stroke-width=\"0.5\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">"
            << fmt(std::abs(y) < 1e-12 * ys ? 0.0 : y) << "</text>\n";
    }
    out << "<line x1=\"" << left << "\" y1=\"" << top + h << "\" x2=\"" << left + w << "\" y2=\""
        << top + h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + h << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left + w / 2 << "\" y=\"" << options.height - 10
        << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
    if (!options.y_label.empty()) {
        out << "<text x=\"16\" y=\"" << top + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << top + h / 2 << ")\">" << escape(options.y_label) << "</text>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % colors.size()];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (s % 2 == 0 && series.size() > 1) out << " stroke-dasharray=\"6,4\"";
        out << " points=\"";
        for (std::size_t k = 0; k < t.size(); ++k) {
            out << sx(t[k]) << ',' << sy(series[s].values[k]) << (k + 1 < t.size() ? " " : "");
        }
        out << "\"/>\n";
    }

    // Legend.
    const double lx = left + w - 150;
    double ly = top + 12;
    for (std::size_t s = 0; s < series.size(); ++s, ly += 18) {
        const char* color = colors[s % colors.size()];
        out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 30 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (s % 2 == 0 && series.size() > 1) out << " stroke-dasharray=\"6,4\"";
        out << "/>\n<text x=\"" << lx + 36 << "\" y=\"" << ly + 4 << "\">"
            << escape(series[s].label) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace pmono
