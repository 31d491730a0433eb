#include "pmono/csv.hpp"

#include "pmono/error.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace pmono {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<std::size_t> CsvTable::column_index(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) return k;
    }
    return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const Grid& grid,
                          const std::vector<const SignalBundle*>& bundles, bool converged) {
    out << 't';
    for (const auto* b : bundles) {
        if (!(b->grid() == grid)) throw DimensionError("csv: bundle on a different grid");
        for (const auto& label : b->labels()) out << ',' << label;
    }
    out << '\n';
    out << std::setprecision(17);
    for (std::size_t k = 0; k < grid.samples(); ++k) {
        out << grid.time(k);
        for (const auto* b : bundles) {
            for (std::size_t c = 0; c < b->channels(); ++c) out << ',' << b->row(c)[k];
        }
        out << '\n';
    }
    if (!converged) out << "# converged=false\n";
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("converged=");
            if (pos != std::string::npos) {
                table.converged = line.compare(pos + 10, 4, "true") == 0;
            }
            continue;
        }
        const auto fields = split(line, ',');
        if (table.header.empty()) {
            for (const auto& f : fields) table.header.push_back(trim(f));
            table.columns.resize(table.header.size());
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ConfigError("csv line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(table.header.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string f = trim(fields[c]);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw ConfigError("csv line " + std::to_string(line_no) + ": bad number '" + f +
                                  "'");
            }
            table.columns[c].push_back(value);
        }
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open csv file '" + path + "'");
    return read_csv(in);
}

}  // namespace pmono
