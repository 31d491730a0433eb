#include "pmono/netlist.hpp"

#include "pmono/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace pmono {

namespace {

// -----------------------------------------------------------------------------
// Tokenizing
// -----------------------------------------------------------------------------

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t k = 0;
    while (k < line.size()) {
        while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
        if (k >= line.size() || line[k] == '#') break;
        const std::size_t start = k;
        while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k])) &&
               line[k] != '#') {
            ++k;
        }
        out.push_back({line.substr(start, k - start), start + 1});
    }
    return out;
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

/// Plain decimal or exponent notation, optionally followed by an SI scale
/// suffix (f p n u m k meg g t, case-insensitive).
double parse_number(const Token& tok, std::size_t line) {
    const char* begin = tok.text.data();
    const char* end = begin + tok.text.size();
    if (begin != end && *begin == '+') ++begin;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) {
        throw ParseError(line, tok.column, "malformed number '" + std::string(tok.text) + "'");
    }
    const std::string suffix = upper(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
    static const std::map<std::string, double> scales = {
        {"", 1.0},   {"F", 1e-15}, {"P", 1e-12}, {"N", 1e-9}, {"U", 1e-6},
        {"M", 1e-3}, {"K", 1e3},   {"MEG", 1e6}, {"G", 1e9},  {"T", 1e12},
    };
    const auto it = scales.find(suffix);
    if (it == scales.end()) {
        throw ParseError(line, tok.column, "malformed number '" + std::string(tok.text) + "'");
    }
    value *= it->second;
    if (!std::isfinite(value)) {
        throw ParseError(line, tok.column, "number '" + std::string(tok.text) + "' is not finite");
    }
    return value;
}

bool is_ground_name(std::string_view name) {
    return name == "0" || upper(name) == "GND";
}

// -----------------------------------------------------------------------------
// Union-find
// -----------------------------------------------------------------------------

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

// -----------------------------------------------------------------------------
// Dense elimination
// -----------------------------------------------------------------------------

/// Solves A X = B by Gaussian elimination with partial pivoting. Returns
/// nullopt when a pivot falls below rel_tol * max|A|.
std::optional<Matrix> solve_partial_pivot(Matrix A, Matrix B, double rel_tol) {
    const Eigen::Index n = A.rows();
    if (n == 0) return Matrix::Zero(0, B.cols());
    const double threshold = rel_tol * A.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index pivot = k;
        for (Eigen::Index r = k + 1; r < n; ++r) {
            if (std::abs(A(r, k)) > std::abs(A(pivot, k))) pivot = r;
        }
        if (!(std::abs(A(pivot, k)) > threshold)) return std::nullopt;
        if (pivot != k) {
            A.row(k).swap(A.row(pivot));
            B.row(k).swap(B.row(pivot));
        }
        for (Eigen::Index r = k + 1; r < n; ++r) {
            const double f = A(r, k) / A(k, k);
            if (f == 0.0) continue;
            A.row(r).tail(n - k - 1) -= f * A.row(k).tail(n - k - 1);
            A(r, k) = 0.0;
            B.row(r) -= f * B.row(k);
        }
    }
    Matrix X(n, B.cols());
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        Eigen::RowVectorXd acc = B.row(k);
        if (k + 1 < n) acc -= A.row(k).tail(n - k - 1) * X.bottomRows(n - k - 1);
        X.row(k) = acc / A(k, k);
    }
    return X;
}

std::string kind_name(BranchKind kind) {
    switch (kind) {
    case BranchKind::Port: return "port";
    case BranchKind::Resistor: return "resistor";
    case BranchKind::Capacitor: return "capacitor";
    case BranchKind::Inductor: return "inductor";
    case BranchKind::Diode: return "diode";
    case BranchKind::ParallelRC: return "parallel RC";
    case BranchKind::Pwl: return "pwl resistor";
    case BranchKind::Winding: return "winding";
    }
    return "branch";
}

}  // namespace

std::string to_string(Excitation kind) {
    return kind == Excitation::Voltage ? "V" : "I";
}

// -----------------------------------------------------------------------------
// Netlist
// -----------------------------------------------------------------------------

std::vector<std::size_t> Netlist::ports() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < branches.size(); ++b) {
        if (branches[b].kind == BranchKind::Port) out.push_back(b);
    }
    return out;
}

std::vector<std::size_t> Netlist::elements() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < branches.size(); ++b) {
        if (branches[b].is_element()) out.push_back(b);
    }
    return out;
}

std::vector<std::size_t> Netlist::windings() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < branches.size(); ++b) {
        if (branches[b].kind == BranchKind::Winding) out.push_back(b);
    }
    return out;
}

std::optional<std::size_t> Netlist::find(std::string_view name) const {
    for (std::size_t b = 0; b < branches.size(); ++b) {
        if (branches[b].name == name) return b;
    }
    return std::nullopt;
}

Netlist parse_netlist(std::string_view text) {
    struct Location {
        std::size_t line;
        std::size_t name_col;
        std::array<std::size_t, 2> node_cols;
        std::size_t group_col;
    };
    struct Pin {
        std::string target;
        std::string value;
        std::size_t line;
        std::size_t target_col;
        std::size_t value_col;
        bool is_form;
    };

    Netlist nl;
    std::map<std::string, std::size_t, std::less<>> node_index;
    std::vector<Location> where;
    std::vector<Pin> pins;

    const auto intern = [&](std::string_view name) {
        const auto it = node_index.find(name);
        if (it != node_index.end()) return it->second;
        const std::size_t id = nl.nodes.size();
        nl.nodes.emplace_back(name);
        node_index.emplace(std::string(name), id);
        return id;
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = eol + 1;
        ++line_no;

        const auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string directive = upper(toks[0].text);

        const auto require_count = [&](std::size_t expected, const char* usage) {
            if (toks.size() < expected) {
                const std::size_t col = toks.back().column + toks.back().text.size();
                throw ParseError(line_no, col, std::string("missing fields, expected: ") + usage);
            }
            if (toks.size() > expected) {
                throw ParseError(line_no, toks[expected].column,
                                 "unexpected token '" + std::string(toks[expected].text) + "'");
            }
        };

        if (directive == "FORM" || directive == "EXCITE") {
            require_count(3, directive == "FORM" ? "FORM <element> Z|Y" : "EXCITE <port> V|I");
            pins.push_back({std::string(toks[1].text), upper(toks[2].text), line_no,
                            toks[1].column, toks[2].column, directive == "FORM"});
            continue;
        }

        Branch br;
        br.line = line_no;
        std::size_t first = 1;  // index of the name token
        Location loc{line_no, 0, {0, 0}, 0};

        if (directive == "PORT") {
            require_count(4, "PORT <name> <n+> <n->");
            br.kind = BranchKind::Port;
        } else if (directive == "R" || directive == "C" || directive == "L") {
            require_count(5, "<R|C|L> <name> <n+> <n-> <value>");
            br.kind = directive == "R"   ? BranchKind::Resistor
                      : directive == "C" ? BranchKind::Capacitor
                                         : BranchKind::Inductor;
            br.values.push_back(parse_number(toks[4], line_no));
            if (br.values[0] < 0.0) {
                throw ParseError(line_no, toks[4].column, "element value must be nonnegative");
            }
        } else if (directive == "D") {
            require_count(4, "D <name> <anode> <cathode>");
            br.kind = BranchKind::Diode;
        } else if (directive == "RC") {
            require_count(6, "RC <name> <n+> <n-> <ohms> <farads>");
            br.kind = BranchKind::ParallelRC;
            for (std::size_t k = 4; k < 6; ++k) {
                br.values.push_back(parse_number(toks[k], line_no));
                if (br.values.back() < 0.0) {
                    throw ParseError(line_no, toks[k].column, "element value must be nonnegative");
                }
            }
        } else if (directive == "PWL") {
            if (toks.size() < 8 || (toks.size() - 4) % 2 != 0) {
                throw ParseError(line_no, toks[0].column,
                                 "PWL needs <name> <n+> <n-> followed by at least two (i, v) pairs");
            }
            br.kind = BranchKind::Pwl;
            std::vector<PwlPoint> pts;
            for (std::size_t k = 4; k < toks.size(); k += 2) {
                br.values.push_back(parse_number(toks[k], line_no));
                br.values.push_back(parse_number(toks[k + 1], line_no));
                pts.push_back({br.values[br.values.size() - 2], br.values.back()});
            }
            try {
                PwlResistor check(pts);
            } catch (const ConfigError& e) {
                throw ParseError(line_no, toks[4].column, e.what());
            }
        } else if (directive == "XFMR") {
            require_count(6, "XFMR <group> <name> <n+> <n-> <turns>");
            br.kind = BranchKind::Winding;
            br.group = std::string(toks[1].text);
            loc.group_col = toks[1].column;
            first = 2;
            br.values.push_back(parse_number(toks[5], line_no));
            if (br.values[0] == 0.0) {
                throw ParseError(line_no, toks[5].column, "winding turns must be nonzero");
            }
        } else {
            throw ParseError(line_no, toks[0].column,
                             "unknown directive '" + std::string(toks[0].text) + "'");
        }

        br.name = std::string(toks[first].text);
        loc.name_col = toks[first].column;
        if (nl.find(br.name)) {
            throw ParseError(line_no, toks[first].column, "duplicate name '" + br.name + "'");
        }
        br.plus = intern(toks[first + 1].text);
        br.minus = intern(toks[first + 2].text);
        loc.node_cols = {toks[first + 1].column, toks[first + 2].column};
        if (br.plus == br.minus) {
            throw ParseError(line_no, toks[first + 2].column,
                             "branch '" + br.name + "' connects node '" +
                                 nl.nodes[br.plus] + "' to itself");
        }
        nl.branches.push_back(std::move(br));
        where.push_back(loc);
    }

    if (nl.branches.empty()) throw ParseError(1, 1, "no branches");

    // Every node must touch at least two branch terminals.
    std::vector<std::size_t> degree(nl.nodes.size(), 0);
    for (const auto& b : nl.branches) {
        ++degree[b.plus];
        ++degree[b.minus];
    }
    for (std::size_t b = 0; b < nl.branches.size(); ++b) {
        const auto& br = nl.branches[b];
        for (int side = 0; side < 2; ++side) {
            const std::size_t node = side == 0 ? br.plus : br.minus;
            if (degree[node] < 2) {
                throw ParseError(where[b].line, where[b].node_cols[static_cast<std::size_t>(side)],
                                 "dangling node '" + nl.nodes[node] + "'");
            }
        }
    }

    // Winding groups and connectivity (magnetic coupling joins components).
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t b = 0; b < nl.branches.size(); ++b) {
        if (nl.branches[b].kind == BranchKind::Winding) groups[nl.branches[b].group].push_back(b);
    }
    DisjointSets sets(nl.nodes.size());
    for (const auto& b : nl.branches) sets.unite(b.plus, b.minus);
    for (const auto& [name, members] : groups) {
        if (members.size() < 2) {
            const auto b = members.front();
            throw ParseError(where[b].line, where[b].group_col,
                             "winding group '" + name + "' has a single winding");
        }
        for (const auto b : members) sets.unite(nl.branches[b].plus, nl.branches[members[0]].plus);
    }
    const std::size_t root = sets.find(nl.branches[0].plus);
    for (std::size_t b = 0; b < nl.branches.size(); ++b) {
        if (sets.find(nl.branches[b].plus) != root) {
            throw ParseError(where[b].line, where[b].name_col,
                             "branch '" + nl.branches[b].name +
                                 "' is not connected to the rest of the circuit");
        }
    }

    for (std::size_t n = 0; n < nl.nodes.size(); ++n) {
        if (is_ground_name(nl.nodes[n])) {
            nl.ground = n;
            break;
        }
    }

    for (const auto& pin : pins) {
        const auto b = nl.find(pin.target);
        if (!b) {
            throw ParseError(pin.line, pin.target_col, "unknown name '" + pin.target + "'");
        }
        const auto& br = nl.branches[*b];
        if (pin.is_form) {
            if (!br.is_element()) {
                throw ParseError(pin.line, pin.target_col, "'" + pin.target + "' is not an element");
            }
            if (pin.value != "Z" && pin.value != "Y") {
                throw ParseError(pin.line, pin.value_col, "form must be Z or Y");
            }
            const Form form = pin.value == "Z" ? Form::Impedance : Form::Admittance;
            const auto allowed = admissible_forms(br);
            if (std::find(allowed.begin(), allowed.end(), form) == allowed.end()) {
                throw ParseError(pin.line, pin.value_col,
                                 "a " + kind_name(br.kind) + " cannot take form " + pin.value);
            }
            nl.form_pins[pin.target] = form;
        } else {
            if (br.kind != BranchKind::Port) {
                throw ParseError(pin.line, pin.target_col, "'" + pin.target + "' is not a port");
            }
            if (pin.value != "V" && pin.value != "I") {
                throw ParseError(pin.line, pin.value_col, "excitation must be V or I");
            }
            nl.excite_pins[pin.target] =
                pin.value == "V" ? Excitation::Voltage : Excitation::Current;
        }
    }
    return nl;
}

Netlist load_netlist(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open netlist '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_netlist(os.str());
}

// -----------------------------------------------------------------------------
// Partitions and laws
// -----------------------------------------------------------------------------

std::string Partition::describe(const Netlist& netlist) const {
    std::string out;
    for (const auto& br : netlist.branches) {
        std::string choice;
        if (br.kind == BranchKind::Port) {
            const auto it = excitations.find(br.name);
            if (it == excitations.end()) continue;
            choice = to_string(it->second);
        } else if (br.is_element()) {
            const auto it = forms.find(br.name);
            if (it == forms.end()) continue;
            choice = to_string(it->second);
        } else {
            continue;
        }
        if (!out.empty()) out += ' ';
        out += br.name + "=" + choice;
    }
    return out;
}

std::vector<Form> admissible_forms(const Branch& branch) {
    switch (branch.kind) {
    case BranchKind::Resistor:
        if (branch.values.at(0) > 0.0) return {Form::Impedance, Form::Admittance};
        return {Form::Impedance};
    case BranchKind::Capacitor: return {Form::Admittance};
    case BranchKind::Inductor: return {Form::Impedance};
    case BranchKind::Diode: return {Form::Impedance, Form::Admittance};
    case BranchKind::ParallelRC: return {Form::Impedance};
    case BranchKind::Pwl: return {Form::Impedance, Form::Admittance};
    case BranchKind::Port:
    case BranchKind::Winding: return {};
    }
    return {};
}

ElementLaw element_law(const Branch& branch, Form form) {
    const auto allowed = admissible_forms(branch);
    if (std::find(allowed.begin(), allowed.end(), form) == allowed.end()) {
        throw ConfigError("element '" + branch.name + "' (" + kind_name(branch.kind) +
                          ") cannot take form " + to_string(form));
    }
    const bool z = form == Form::Impedance;
    switch (branch.kind) {
    case BranchKind::Resistor:
        if (z) return ResistorImpedance{branch.values[0]};
        return ResistorAdmittance{1.0 / branch.values[0]};
    case BranchKind::Capacitor: return CapacitorAdmittance{branch.values[0]};
    case BranchKind::Inductor: return InductorImpedance{branch.values[0]};
    case BranchKind::Diode:
        if (z) return DiodeImpedance{};
        return DiodeAdmittance{};
    case BranchKind::ParallelRC: return ParallelRCImpedance{branch.values[0], branch.values[1]};
    case BranchKind::Pwl: {
        std::vector<PwlPoint> pts;
        for (std::size_t k = 0; k + 1 < branch.values.size(); k += 2) {
            pts.push_back({branch.values[k], branch.values[k + 1]});
        }
        PwlResistor curve(std::move(pts));
        if (z) return curve;
        return curve.inverse();
    }
    case BranchKind::Port:
    case BranchKind::Winding: break;
    }
    throw ConfigError("branch '" + branch.name + "' is not an element");
}

std::pair<std::string, std::string> port_labels(const Branch& port, Excitation kind) {
    if (kind == Excitation::Voltage) return {"v_" + port.name, "i_" + port.name};
    return {"i_" + port.name, "v_" + port.name};
}

// -----------------------------------------------------------------------------
// Hybrid derivation
// -----------------------------------------------------------------------------

DerivedHybrid derive_hybrid(const Netlist& nl, const Partition& partition) {
    const auto ports = nl.ports();
    const auto elements = nl.elements();
    const std::size_t nb = nl.branches.size();

    std::vector<Excitation> port_kind;
    for (const auto b : ports) {
        const auto it = partition.excitations.find(nl.branches[b].name);
        if (it == partition.excitations.end()) {
            throw ConfigError("partition gives no excitation kind for port '" +
                              nl.branches[b].name + "'");
        }
        port_kind.push_back(it->second);
    }
    std::vector<std::size_t> z_elems, y_elems;
    for (const auto b : elements) {
        const auto& br = nl.branches[b];
        const auto it = partition.forms.find(br.name);
        if (it == partition.forms.end()) {
            throw ConfigError("partition gives no form for element '" + br.name + "'");
        }
        const auto allowed = admissible_forms(br);
        if (std::find(allowed.begin(), allowed.end(), it->second) == allowed.end()) {
            throw ConfigError("element '" + br.name + "' cannot take form " +
                              to_string(it->second));
        }
        (it->second == Form::Impedance ? z_elems : y_elems).push_back(b);
    }

    // One reference node per electrically connected component.
    DisjointSets sets(nl.nodes.size());
    for (const auto& br : nl.branches) sets.unite(br.plus, br.minus);
    std::vector<std::optional<std::size_t>> reference(nl.nodes.size());
    if (nl.ground) reference[sets.find(*nl.ground)] = *nl.ground;
    for (std::size_t n = 0; n < nl.nodes.size(); ++n) {
        auto& ref = reference[sets.find(n)];
        if (!ref) ref = n;
    }
    std::vector<std::optional<std::size_t>> potential(nl.nodes.size());
    std::size_t n_pot = 0;
    for (std::size_t n = 0; n < nl.nodes.size(); ++n) {
        if (*reference[sets.find(n)] != n) potential[n] = n_pot++;
    }

    // Unknowns: (v_b, i_b) per branch, then node potentials.
    const auto v_var = [](std::size_t b) { return 2 * b; };
    const auto i_var = [](std::size_t b) { return 2 * b + 1; };
    const std::size_t n_vars = 2 * nb + n_pot;
    const auto pot_var = [&](std::size_t node) { return 2 * nb + *potential[node]; };

    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
    for (std::size_t b = 0; b < nb; ++b) {  // KVL
        const auto& br = nl.branches[b];
        std::vector<std::pair<std::size_t, double>> row{{v_var(b), 1.0}};
        if (potential[br.plus]) row.emplace_back(pot_var(br.plus), -1.0);
        if (potential[br.minus]) row.emplace_back(pot_var(br.minus), 1.0);
        rows.push_back(std::move(row));
    }
    for (std::size_t n = 0; n < nl.nodes.size(); ++n) {  // KCL
        if (!potential[n]) continue;
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t b = 0; b < nb; ++b) {
            if (nl.branches[b].plus == n) row.emplace_back(i_var(b), 1.0);
            if (nl.branches[b].minus == n) row.emplace_back(i_var(b), -1.0);
        }
        rows.push_back(std::move(row));
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (const auto b : nl.windings()) groups[nl.branches[b].group].push_back(b);
    for (const auto& [name, members] : groups) {  // ideal transformer
        const std::size_t w0 = members.front();
        const double n0 = nl.branches[w0].values[0];
        for (std::size_t k = 1; k < members.size(); ++k) {
            const std::size_t wk = members[k];
            const double nk = nl.branches[wk].values[0];
            rows.push_back({{v_var(wk), n0}, {v_var(w0), -nk}});
        }
        std::vector<std::pair<std::size_t, double>> flux;
        for (const auto w : members) flux.emplace_back(i_var(w), nl.branches[w].values[0]);
        rows.push_back(std::move(flux));
    }

    // Independent variables (u; z) in column order.
    std::vector<std::size_t> independent;
    std::vector<std::string> column_labels;
    std::vector<std::size_t> dependent_rows;  // response variables (y; z~)
    std::vector<std::string> row_labels;
    for (std::size_t k = 0; k < ports.size(); ++k) {
        const auto& br = nl.branches[ports[k]];
        const bool voltage = port_kind[k] == Excitation::Voltage;
        independent.push_back(voltage ? v_var(ports[k]) : i_var(ports[k]));
        dependent_rows.push_back(voltage ? i_var(ports[k]) : v_var(ports[k]));
        const auto [in_label, out_label] = port_labels(br, port_kind[k]);
        column_labels.push_back(in_label);
        row_labels.push_back(out_label);
    }
    for (const auto b : z_elems) {
        independent.push_back(i_var(b));
        dependent_rows.push_back(v_var(b));
        column_labels.push_back("i_" + nl.branches[b].name);
        row_labels.push_back("v_" + nl.branches[b].name);
    }
    for (const auto b : y_elems) {
        independent.push_back(v_var(b));
        dependent_rows.push_back(i_var(b));
        column_labels.push_back("v_" + nl.branches[b].name);
        row_labels.push_back("i_" + nl.branches[b].name);
    }

    std::vector<std::optional<std::size_t>> ind_pos(n_vars), dep_pos(n_vars);
    for (std::size_t k = 0; k < independent.size(); ++k) ind_pos[independent[k]] = k;
    std::size_t n_dep = 0;
    for (std::size_t x = 0; x < n_vars; ++x) {
        if (!ind_pos[x]) dep_pos[x] = n_dep++;
    }
    if (rows.size() != n_dep) {
        throw Error("constraint count " + std::to_string(rows.size()) +
                    " does not match unknown count " + std::to_string(n_dep));
    }

    const auto dim = [](std::size_t n) { return static_cast<Eigen::Index>(n); };
    Matrix A_dep = Matrix::Zero(dim(n_dep), dim(n_dep));
    Matrix A_ind = Matrix::Zero(dim(n_dep), dim(independent.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto& [var, coeff] : rows[r]) {
            if (ind_pos[var]) A_ind(dim(r), dim(*ind_pos[var])) += coeff;
            else A_dep(dim(r), dim(*dep_pos[var])) += coeff;
        }
    }
    const auto solution = solve_partial_pivot(A_dep, -A_ind, kPivotTolerance);
    if (!solution) {
        throw RepresentationError("no hybrid representation for partition [" +
                                  partition.describe(nl) + "]");
    }

    const std::size_t n_ext = ports.size() + z_elems.size() + y_elems.size();
    Matrix H(dim(n_ext), dim(n_ext));
    for (std::size_t r = 0; r < n_ext; ++r) {
        H.row(dim(r)) = solution->row(dim(*dep_pos[dependent_rows[r]]));
    }

    const auto positive_zero = [](double x) { return x == 0.0 ? 0.0 : x; };
    H = H.unaryExpr(positive_zero);
    HybridMatrix hybrid(std::move(H), ports.size(), z_elems.size(), y_elems.size());
    const double skew = hybrid.skewness_defect();
    if (skew > 1e-9) {
        throw Error("derived hybrid matrix is not skew-symmetric (defect " +
                    std::to_string(skew) + ")");
    }
    const double block = hybrid.block_defect();
    if (block > 1e-9) {
        throw Error("derived hybrid matrix couples like variables (defect " +
                    std::to_string(block) + ")");
    }
    Interconnection ic = hybrid.interconnection();
    for (Matrix* block_ptr : {&ic.M, &ic.B_R, &ic.B_G, &ic.D}) {
        *block_ptr = block_ptr->unaryExpr(positive_zero);
    }
    return DerivedHybrid{std::move(hybrid), std::move(row_labels), std::move(column_labels),
                         std::move(ic),     partition,            ports,
                         z_elems,           y_elems};
}

Partition partition_search(const Netlist& nl, const Partition& fixed) {
    struct Decision {
        const Branch* branch;
        std::vector<int> options;  // Form or Excitation values
    };
    std::vector<Decision> decisions;
    for (const auto& br : nl.branches) {
        if (br.kind == BranchKind::Port) {
            std::optional<Excitation> pin;
            if (auto it = nl.excite_pins.find(br.name); it != nl.excite_pins.end()) pin = it->second;
            if (auto it = fixed.excitations.find(br.name); it != fixed.excitations.end()) {
                pin = it->second;
            }
            if (pin) decisions.push_back({&br, {static_cast<int>(*pin)}});
            else decisions.push_back({&br, {static_cast<int>(Excitation::Voltage),
                                            static_cast<int>(Excitation::Current)}});
        } else if (br.is_element()) {
            const auto allowed = admissible_forms(br);
            std::optional<Form> pin;
            if (auto it = nl.form_pins.find(br.name); it != nl.form_pins.end()) pin = it->second;
            if (auto it = fixed.forms.find(br.name); it != fixed.forms.end()) pin = it->second;
            if (pin) {
                if (std::find(allowed.begin(), allowed.end(), *pin) == allowed.end()) {
                    throw ConfigError("element '" + br.name + "' cannot take form " +
                                      to_string(*pin));
                }
                decisions.push_back({&br, {static_cast<int>(*pin)}});
            } else {
                Decision d{&br, {}};
                for (const auto f : allowed) d.options.push_back(static_cast<int>(f));
                decisions.push_back(std::move(d));
            }
        }
    }
    for (const auto& [name, form] : fixed.forms) {
        const auto b = nl.find(name);
        if (!b || !nl.branches[*b].is_element()) {
            throw ConfigError("partition pin names unknown element '" + name + "'");
        }
    }
    for (const auto& [name, kind] : fixed.excitations) {
        const auto b = nl.find(name);
        if (!b || nl.branches[*b].kind != BranchKind::Port) {
            throw ConfigError("partition pin names unknown port '" + name + "'");
        }
    }

    constexpr std::size_t kMaxAttempts = 1u << 16;
    std::vector<std::string> attempts;
    Partition current;
    std::optional<Partition> found;

    std::function<void(std::size_t)> visit = [&](std::size_t depth) {
        if (found || attempts.size() >= kMaxAttempts) return;
        if (depth == decisions.size()) {
            attempts.push_back(current.describe(nl));
            try {
                derive_hybrid(nl, current);
                found = current;
            } catch (const RepresentationError&) {
            }
            return;
        }
        const auto& d = decisions[depth];
        for (const int option : d.options) {
            if (d.branch->kind == BranchKind::Port) {
                current.excitations[d.branch->name] = static_cast<Excitation>(option);
            } else {
                current.forms[d.branch->name] = static_cast<Form>(option);
            }
            visit(depth + 1);
            if (found) return;
        }
    };
    visit(0);
    if (found) return *found;

    std::string msg = "no hybrid representation found; attempted " +
                      std::to_string(attempts.size()) + " partition(s):";
    for (const auto& a : attempts) msg += "\n  [" + a + "]";
    throw RepresentationError(msg);
}

// -----------------------------------------------------------------------------
// compile
// -----------------------------------------------------------------------------

Problem compile(const Netlist& nl, const Partition& partition, const Grid& grid,
                const std::map<std::string, PeriodicSignal>& excitations) {
    const DerivedHybrid derived = derive_hybrid(nl, partition);

    for (const auto& [name, signal] : excitations) {
        const auto b = nl.find(name);
        if (!b || nl.branches[*b].kind != BranchKind::Port) {
            throw ConfigError("excitation given for unknown port '" + name + "'");
        }
    }

    std::vector<PeriodicSignal> u_channels;
    std::vector<std::string> u_labels, y_labels;
    for (const auto b : derived.ports) {
        const auto& br = nl.branches[b];
        const auto it = excitations.find(br.name);
        if (it == excitations.end()) {
            throw ConfigError("no excitation given for port '" + br.name + "'");
        }
        if (!(it->second.grid() == grid)) {
            throw DimensionError("excitation for port '" + br.name + "' is on a different grid");
        }
        u_channels.push_back(it->second);
        const auto [in_label, out_label] = port_labels(br, partition.excitations.at(br.name));
        u_labels.push_back(in_label);
        y_labels.push_back(out_label);
    }

    std::vector<ElementLaw> r_laws, g_laws;
    std::vector<std::string> i_labels, v_labels;
    for (const auto b : derived.impedance_elements) {
        r_laws.push_back(element_law(nl.branches[b], Form::Impedance));
        i_labels.push_back("i_" + nl.branches[b].name);
    }
    for (const auto b : derived.admittance_elements) {
        g_laws.push_back(element_law(nl.branches[b], Form::Admittance));
        v_labels.push_back("v_" + nl.branches[b].name);
    }

    Problem problem{grid,
                    derived.ic,
                    DiagonalOperator(Form::Impedance, std::move(r_laws)),
                    DiagonalOperator(Form::Admittance, std::move(g_laws)),
                    SignalBundle::from_channels(grid, u_channels, std::move(u_labels)),
                    std::move(i_labels),
                    std::move(v_labels),
                    std::move(y_labels)};
    validate_problem(problem);
    return problem;
}

Problem compile(const Netlist& nl, const Partition& partition, const Grid& grid,
                const std::map<std::string, Waveform>& excitations) {
    std::map<std::string, PeriodicSignal> signals;
    for (const auto& [name, wave] : excitations) signals.emplace(name, make_waveform(wave, grid));
    return compile(nl, partition, grid, signals);
}

}  // namespace pmono
