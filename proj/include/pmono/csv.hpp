#pragma once

// Trajectory CSV files: header "t,<labels>", one row per sample, 17
// significant digits. A run that did not converge ends with the comment line
// "# converged=false".

#include "pmono/signal.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pmono {

struct CsvTable {
    std::vector<std::string> header;           // header[0] is "t"
    std::vector<std::vector<double>> columns;  // parallel to header
    std::optional<bool> converged;             // from a trailing comment, if any

    [[nodiscard]] std::optional<std::size_t> column_index(const std::string& name) const;
    [[nodiscard]] std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
};

/// Writes the bundles side by side against t = k dt.
void write_trajectory_csv(std::ostream& out, const Grid& grid,
                          const std::vector<const SignalBundle*>& bundles, bool converged);

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace pmono
