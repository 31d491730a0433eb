#pragma once

// Static SVG line plots of trajectories against time.

#include <iosfwd>
#include <string>
#include <vector>

namespace pmono {

struct PlotSeries {
    std::string label;
    std::vector<double> values;
};

struct PlotOptions {
    std::string title;
    std::string x_label = "t (s)";
    std::string y_label;
    int width = 800;
    int height = 420;
};

void write_svg_plot(std::ostream& out, const std::vector<double>& t,
                    const std::vector<PlotSeries>& series, const PlotOptions& options = {});

}  // namespace pmono
