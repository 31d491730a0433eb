#include "pmono/commands.hpp"

#include "CLI11.hpp"
#include "pmono/csv.hpp"
#include "pmono/error.hpp"
#include "pmono/netlist.hpp"
#include "pmono/plot.hpp"
#include "pmono/problem_io.hpp"
#include "pmono/solver.hpp"
#include "pmono/time_march.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pmono {

namespace {

struct InputOptions {
    std::string problem;
    std::string netlist;
    std::vector<std::string> partition;
    std::optional<std::size_t> samples;
    std::optional<double> dt;
    std::vector<std::string> waves;
};

struct SolveOptions {
    InputOptions input;
    std::optional<double> tau;
    std::optional<double> sigma;
    double tol = 1e-6;
    std::size_t max_iters = 500000;
    std::size_t check_every = 10;
    bool force_steps = false;
    std::optional<double> smooth;
    std::string out;
    std::string residuals;
    std::string plot;
};

struct CompileOptions {
    InputOptions input;
    std::string out;
    bool print_hybrid = false;
};

struct SimulateOptions {
    InputOptions input;
    std::size_t periods = 50;
    double smooth = 1e-6;
    std::optional<double> tau;
    std::optional<double> sigma;
    double step_tol = 1e-10;
    std::size_t step_max_iters = 1000000;
    std::string out;
    std::string plot;
};

struct PlotOptionsCli {
    std::string csv;
    std::vector<std::string> columns;
    std::vector<std::string> scales;
    std::string out;
    std::string title;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
    const std::string s = trim(text);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + text + "' in " + what);
    }
    if (used != s.size() || !std::isfinite(value)) {
        throw ConfigError("bad number '" + text + "' in " + what);
    }
    return value;
}

/// "a" or "a/b".
double parse_factor(const std::string& text, const std::string& what) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return parse_number(text, what);
    const double den = parse_number(text.substr(slash + 1), what);
    if (den == 0.0) throw ConfigError("division by zero in " + what);
    return parse_number(text.substr(0, slash), what) / den;
}

/// PORT=sine:A,F[,PHASE] or PORT=const:LEVEL.
std::pair<std::string, Waveform> parse_wave(const std::string& spec) {
    const auto eq = spec.find('=');
    const auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || eq == 0 || colon == std::string::npos) {
        throw ConfigError("--wave expects PORT=sine:A,F[,PHASE] or PORT=const:LEVEL, got '" +
                          spec + "'");
    }
    const std::string port = trim(spec.substr(0, eq));
    const std::string type = trim(spec.substr(eq + 1, colon - eq - 1));
    const auto args = split(spec.substr(colon + 1), ',');
    const std::string what = "--wave " + spec;
    if (type == "sine") {
        if (args.size() < 2 || args.size() > 3) throw ConfigError(what + ": sine needs A,F[,PHASE]");
        Sine s{parse_number(args[0], what), parse_number(args[1], what),
               args.size() == 3 ? parse_number(args[2], what) : 0.0};
        return {port, s};
    }
    if (type == "const") {
        if (args.size() != 1) throw ConfigError(what + ": const needs LEVEL");
        return {port, Constant{parse_number(args[0], what)}};
    }
    throw ConfigError(what + ": unknown waveform type '" + type + "'");
}

Partition parse_partition(const std::vector<std::string>& pins, const Netlist& nl) {
    Partition fixed;
    for (const auto& group : pins) {
        for (const auto& pin : split(group, ',')) {
            if (trim(pin).empty()) continue;
            const auto eq = pin.find('=');
            if (eq == std::string::npos) throw ConfigError("--partition expects NAME=Z|Y|V|I");
            const std::string name = trim(pin.substr(0, eq));
            const std::string tag = trim(pin.substr(eq + 1));
            const auto idx = nl.find(name);
            if (!idx) throw ConfigError("--partition: unknown branch '" + name + "'");
            const Branch& br = nl.branches[*idx];
            if (br.kind == BranchKind::Port) {
                if (tag == "V") fixed.excitations[name] = Excitation::Voltage;
                else if (tag == "I") fixed.excitations[name] = Excitation::Current;
                else throw ConfigError("--partition: port '" + name + "' takes V or I");
            } else if (br.is_element()) {
                if (tag == "Z") fixed.forms[name] = Form::Impedance;
                else if (tag == "Y") fixed.forms[name] = Form::Admittance;
                else throw ConfigError("--partition: element '" + name + "' takes Z or Y");
            } else {
                throw ConfigError("--partition: '" + name + "' is a winding");
            }
        }
    }
    return fixed;
}

std::map<std::string, Waveform> parse_waves(const std::vector<std::string>& specs) {
    std::map<std::string, Waveform> waves;
    for (const auto& s : specs) {
        auto [port, w] = parse_wave(s);
        if (!waves.emplace(port, w).second) {
            throw ConfigError("--wave given twice for port '" + port + "'");
        }
    }
    return waves;
}

std::optional<Grid> grid_override(const InputOptions& in, const std::optional<Grid>& base) {
    if (!in.samples && !in.dt) return base;
    const std::size_t n = in.samples ? *in.samples : (base ? base->samples() : 0);
    const double dt = in.dt ? *in.dt : (base ? base->dt() : 0.0);
    if (n == 0 || dt == 0.0) throw ConfigError("grid needs both --samples and --dt");
    return Grid(n, dt);
}

struct Compiled {
    ProblemDocument doc;
    std::optional<DerivedHybrid> derived;
    std::optional<Netlist> netlist;
};

Compiled load_input(const InputOptions& in) {
    if (in.problem.empty() == in.netlist.empty()) {
        throw ConfigError("exactly one of --problem and --netlist is required");
    }
    const auto waves = parse_waves(in.waves);
    Compiled c;
    if (!in.problem.empty()) {
        if (!in.partition.empty()) throw ConfigError("--partition applies to --netlist only");
        c.doc = load_problem_document(in.problem);
        c.doc.grid = grid_override(in, c.doc.grid);
        for (const auto& [port, w] : waves) {
            bool found = false;
            for (auto& e : c.doc.excitations) {
                if (e.port == port) {
                    e.waveform = w;
                    found = true;
                }
            }
            if (!found) throw ConfigError("--wave: problem has no port '" + port + "'");
        }
        return c;
    }
    c.netlist = load_netlist(in.netlist);
    const Partition partition = partition_search(*c.netlist, parse_partition(in.partition, *c.netlist));
    c.derived = derive_hybrid(*c.netlist, partition);
    c.doc = make_document(*c.netlist, *c.derived, grid_override(in, std::nullopt), waves);
    return c;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f.exceptions(std::ios::badbit);
    return f;
}

std::string scaled_label(const std::string& col, double f) {
    if (f == 1.0) return col;
    std::ostringstream os;
    os << std::setprecision(6);
    if (std::abs(f) < 1.0 && std::abs(1.0 / f - std::round(1.0 / f)) < 1e-9) {
        os << col << '/' << std::round(1.0 / f);
    } else {
        os << f << '*' << col;
    }
    return os.str();
}

void plot_table(const CsvTable& table, const std::vector<std::string>& columns,
                const std::map<std::string, double>& scales, const std::string& path,
                const std::string& title) {
    if (table.rows() == 0) throw ConfigError("CSV has no data rows");
    std::vector<PlotSeries> series;
    for (const auto& col : columns) {
        const auto idx = table.column_index(col);
        if (!idx) throw ConfigError("unknown column '" + col + "'");
        double f = 1.0;
        if (const auto it = scales.find(col); it != scales.end()) f = it->second;
        PlotSeries s{scaled_label(col, f), table.columns[*idx]};
        for (auto& x : s.values) x *= f;
        series.push_back(std::move(s));
    }
    for (const auto& [col, f] : scales) {
        (void)f;
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
            throw ConfigError("--scale names column '" + col + "' that is not plotted");
        }
    }
    PlotOptions opts;
    opts.title = title;
    auto file = open_output(path);
    write_svg_plot(file, table.columns[0], series, opts);
}

/// Renders the bundles through the CSV path so the plot shows exactly what was written.
void plot_bundles(const Grid& grid, const std::vector<const SignalBundle*>& bundles,
                  const std::string& path, const std::string& title) {
    std::stringstream buf;
    write_trajectory_csv(buf, grid, bundles, true);
    const CsvTable table = read_csv(buf);
    std::vector<std::string> cols(table.header.begin() + 1, table.header.end());
    plot_table(table, cols, {}, path, title);
}

void add_input_options(CLI::App* cmd, InputOptions& in, bool netlist_only = false) {
    if (!netlist_only) cmd->add_option("--problem", in.problem, "Problem document (JSON)");
    cmd->add_option("--netlist", in.netlist, "Netlist file")->required(netlist_only);
    cmd->add_option("--partition", in.partition, "Pins NAME=Z|Y|V|I, comma separated");
    cmd->add_option("--samples", in.samples, "Samples per period");
    cmd->add_option("--dt", in.dt, "Sample spacing in seconds");
    cmd->add_option("--wave", in.waves, "PORT=sine:A,F[,PHASE] or PORT=const:LEVEL");
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const Compiled c = load_input(o.input);
    Problem problem = to_problem(c.doc);
    if (o.smooth) problem = smooth_diodes(problem, *o.smooth);

    SolverConfig cfg;
    cfg.tau = o.tau;
    cfg.sigma = o.sigma;
    cfg.tol = o.tol;
    cfg.max_iters = o.max_iters;
    cfg.check_every = o.check_every;
    cfg.force_steps = o.force_steps;
    std::ofstream residual_file;
    if (!o.residuals.empty()) {
        residual_file = open_output(o.residuals);
        residual_file << "iteration,residual\n";
        cfg.residual_log = &residual_file;
    }

    const SolverResult result = condat_vu_solve(problem, cfg);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';

    const std::vector<const SignalBundle*> bundles{&problem.u, &result.y, &result.i, &result.v};
    std::vector<std::string> written;
    if (o.out.empty()) {
        write_trajectory_csv(out, problem.grid, bundles, result.converged);
    } else {
        auto file = open_output(o.out);
        write_trajectory_csv(file, problem.grid, bundles, result.converged);
        written.push_back(o.out);
    }
    if (!o.residuals.empty()) written.push_back(o.residuals);
    if (!o.plot.empty()) {
        plot_bundles(problem.grid, {&problem.u, &result.y}, o.plot, "periodic steady state");
        written.push_back(o.plot);
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double last = result.residual_history.empty() ? 0.0 : result.residual_history.back().residual;
    err << (result.converged ? "converged" : "not converged") << " after " << result.iterations
        << " iterations, residual " << std::setprecision(3) << last << ", tau " << result.tau
        << ", sigma " << result.sigma << ", " << std::setprecision(3) << elapsed << " s\n";
    for (const auto& p : written) err << "wrote " << p << '\n';
    return result.converged ? kExitOk : kExitNonConvergence;
}

int cmd_compile(const CompileOptions& o, std::ostream& out, std::ostream& err) {
    const Compiled c = load_input(o.input);
    const DerivedHybrid& d = *c.derived;
    err << "partition: " << d.partition.describe(*c.netlist) << '\n';
    if (o.print_hybrid) {
        const Matrix& H = d.H.matrix();
        std::size_t width = 0;
        for (const auto& l : d.column_labels) width = std::max(width, l.size());
        width = std::max<std::size_t>(width, 10) + 2;
        out << std::setw(static_cast<int>(width)) << "";
        for (const auto& l : d.column_labels) out << std::setw(static_cast<int>(width)) << l;
        out << '\n';
        for (Eigen::Index r = 0; r < H.rows(); ++r) {
            out << std::setw(static_cast<int>(width)) << d.row_labels[static_cast<std::size_t>(r)];
            for (Eigen::Index k = 0; k < H.cols(); ++k) {
                const double x = H(r, k);
                out << std::setw(static_cast<int>(width)) << std::setprecision(6)
                    << (x == 0.0 ? 0.0 : x);
            }
            out << '\n';
        }
    }
    const std::string text = dump_problem_document(c.doc);
    if (o.out.empty()) {
        if (!o.print_hybrid) out << text << '\n';
    } else {
        auto file = open_output(o.out);
        file << text << '\n';
        err << "wrote " << o.out << '\n';
    }
    return kExitOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const Compiled c = load_input(o.input);
    const Problem problem = smooth_diodes(to_problem(c.doc), o.smooth);
    MarchConfig cfg;
    cfg.periods = o.periods;
    cfg.tau = o.tau;
    cfg.sigma = o.sigma;
    cfg.step_tol = o.step_tol;
    cfg.step_max_iters = o.step_max_iters;
    const MarchResult r = backward_euler_march(problem, cfg);

    const std::vector<const SignalBundle*> bundles{&problem.u, &r.y, &r.i, &r.v};
    if (o.out.empty()) {
        write_trajectory_csv(out, problem.grid, bundles, true);
    } else {
        auto file = open_output(o.out);
        write_trajectory_csv(file, problem.grid, bundles, true);
    }
    if (!o.plot.empty()) plot_bundles(problem.grid, {&problem.u, &r.y}, o.plot, "time march, final period");
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "marched " << r.steps << " steps, " << r.total_iterations << " inner iterations, "
        << std::setprecision(3) << elapsed << " s\n";
    return kExitOk;
}

int cmd_plot(const PlotOptionsCli& o) {
    const CsvTable table = read_csv_file(o.csv);
    std::vector<std::string> columns;
    for (const auto& group : o.columns) {
        for (const auto& c : split(group, ',')) {
            if (!trim(c).empty()) columns.push_back(trim(c));
        }
    }
    if (columns.empty()) throw ConfigError("--columns names no column");
    std::map<std::string, double> scales;
    for (const auto& group : o.scales) {
        for (const auto& s : split(group, ',')) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--scale expects COLUMN=FACTOR");
            scales[trim(s.substr(0, eq))] = parse_factor(s.substr(eq + 1), "--scale " + s);
        }
    }
    plot_table(table, columns, scales, o.out, o.title);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Periodic steady state of monotone circuits", "pmono"};
    app.require_subcommand(1);

    SolveOptions solve;
    auto* s = app.add_subcommand("solve", "Solve for the periodic steady state");
    add_input_options(s, solve.input);
    s->add_option("--tau", solve.tau, "Primal step");
    s->add_option("--sigma", solve.sigma, "Dual step");
    s->add_option("--tol", solve.tol, "Fixed-point residual tolerance");
    s->add_option("--max-iters", solve.max_iters, "Iteration limit");
    s->add_option("--check-every", solve.check_every, "Iterations between residual checks");
    s->add_flag("--force-steps", solve.force_steps, "Run even if tau*sigma*||M||^2 >= 1");
    s->add_option("--smooth", solve.smooth, "Replace ideal diodes by PWL curves with this slope");
    s->add_option("--out", solve.out, "CSV output (default stdout)");
    s->add_option("--residuals", solve.residuals, "Residual log");
    s->add_option("--plot", solve.plot, "SVG plot of excitations and responses");

    CompileOptions compile_opts;
    auto* c = app.add_subcommand("compile", "Derive the inclusion data of a netlist");
    add_input_options(c, compile_opts.input, true);
    c->add_option("--out", compile_opts.out, "Problem document output (default stdout)");
    c->add_flag("--print-hybrid", compile_opts.print_hybrid, "Print the hybrid matrix");

    SimulateOptions sim;
    auto* m = app.add_subcommand("simulate", "Backward-Euler time march from rest");
    add_input_options(m, sim.input);
    m->add_option("--periods", sim.periods, "Periods to march")->capture_default_str();
    m->add_option("--smooth", sim.smooth, "Diode smoothing slope")->capture_default_str();
    m->add_option("--tau", sim.tau, "Primal step of the per-step solve");
    m->add_option("--sigma", sim.sigma, "Dual step of the per-step solve");
    m->add_option("--step-tol", sim.step_tol, "Per-step residual tolerance")->capture_default_str();
    m->add_option("--step-max-iters", sim.step_max_iters, "Per-step iteration limit");
    m->add_option("--out", sim.out, "CSV of the final period (default stdout)");
    m->add_option("--plot", sim.plot, "SVG plot of the final period");

    PlotOptionsCli plot;
    auto* p = app.add_subcommand("plot", "Plot CSV columns against t");
    p->add_option("--csv", plot.csv, "Trajectory CSV")->required();
    p->add_option("--columns", plot.columns, "Columns, comma separated")->required();
    p->add_option("--scale", plot.scales, "COLUMN=FACTOR, factor may be a/b");
    p->add_option("--out", plot.out, "SVG output")->required();
    p->add_option("--title", plot.title, "Plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInput;
    }

    try {
        if (*s) return cmd_solve(solve, out, err);
        if (*c) return cmd_compile(compile_opts, out, err);
        if (*m) return cmd_simulate(sim, out, err);
        return cmd_plot(plot);
    } catch (const StepNonConvergence& e) {
        err << "error: step " << e.step() << ": " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace pmono
