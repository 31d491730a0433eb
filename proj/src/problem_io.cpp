#include "pmono/problem_io.hpp"

#include "pmono/error.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace pmono {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json matrix_to_json(const Matrix& a) {
    json out = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) out.push_back(a(r, c));
    }
    return out;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* name) {
    const auto R = static_cast<Eigen::Index>(rows);
    const auto C = static_cast<Eigen::Index>(cols);
    Matrix out = Matrix::Zero(R, C);
    if (j.is_null()) {
        if (rows * cols == 0) return out;
        throw ConfigError(std::string("structure.") + name + " is missing");
    }
    if (!j.is_array()) throw ConfigError(std::string("structure.") + name + " must be an array");
    const bool nested = !j.empty() && j.front().is_array();
    if (nested) {
        if (j.size() != rows) {
            throw ConfigError(std::string("structure.") + name + " has " +
                              std::to_string(j.size()) + " rows, expected " +
                              std::to_string(rows));
        }
        for (std::size_t r = 0; r < rows; ++r) {
            if (!j[r].is_array() || j[r].size() != cols) {
                throw ConfigError(std::string("structure.") + name + " row " + std::to_string(r) +
                                  " does not have " + std::to_string(cols) + " entries");
            }
            for (std::size_t c = 0; c < cols; ++c) {
                out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    j[r][c].get<double>();
            }
        }
        return out;
    }
    if (j.size() != rows * cols) {
        throw ConfigError(std::string("structure.") + name + " has " + std::to_string(j.size()) +
                          " entries, expected " + std::to_string(rows) + "x" +
                          std::to_string(cols));
    }
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                j[r * cols + c].get<double>();
        }
    }
    return out;
}

json law_to_json(const ElementLaw& law) {
    json out;
    std::visit(Overloaded{
                   [&](const DiodeImpedance&) {
                       out["law"] = "diode_impedance";
                       out["params"] = json::object();
                   },
                   [&](const DiodeAdmittance&) {
                       out["law"] = "diode_admittance";
                       out["params"] = json::object();
                   },
                   [&](const ResistorImpedance& r) {
                       out["law"] = "resistor_impedance";
                       out["params"] = {{"R", r.resistance}};
                   },
                   [&](const ResistorAdmittance& g) {
                       out["law"] = "resistor_admittance";
                       out["params"] = {{"G", g.conductance}};
                   },
                   [&](const CapacitorAdmittance& c) {
                       out["law"] = "capacitor_admittance";
                       out["params"] = {{"C", c.capacitance}};
                   },
                   [&](const InductorImpedance& l) {
                       out["law"] = "inductor_impedance";
                       out["params"] = {{"L", l.inductance}};
                   },
                   [&](const ParallelRCImpedance& rc) {
                       out["law"] = "parallel_rc_impedance";
                       out["params"] = {{"R", rc.resistance}, {"C", rc.capacitance}};
                   },
                   [&](const PwlResistor& p) {
                       json pts = json::array();
                       for (const auto& pt : p.points()) pts.push_back({pt.x, pt.y});
                       out["law"] = "pwl";
                       out["params"] = {{"points", pts}};
                   },
               },
               law);
    return out;
}

double param(const json& params, const char* key, const std::string& law) {
    if (!params.contains(key)) {
        throw ConfigError("law '" + law + "' needs parameter '" + key + "'");
    }
    return params.at(key).get<double>();
}

ElementLaw law_from_json(const std::string& law, const json& params) {
    if (law == "diode_impedance") return DiodeImpedance{};
    if (law == "diode_admittance") return DiodeAdmittance{};
    if (law == "resistor_impedance") return ResistorImpedance{param(params, "R", law)};
    if (law == "resistor_admittance") return ResistorAdmittance{param(params, "G", law)};
    if (law == "capacitor_admittance") return CapacitorAdmittance{param(params, "C", law)};
    if (law == "inductor_impedance") return InductorImpedance{param(params, "L", law)};
    if (law == "parallel_rc_impedance") {
        return ParallelRCImpedance{param(params, "R", law), param(params, "C", law)};
    }
    if (law == "pwl") {
        if (!params.contains("points")) throw ConfigError("law 'pwl' needs parameter 'points'");
        std::vector<PwlPoint> pts;
        for (const auto& pt : params.at("points")) {
            if (!pt.is_array() || pt.size() != 2) {
                throw ConfigError("pwl points must be [x, y] pairs");
            }
            pts.push_back({pt[0].get<double>(), pt[1].get<double>()});
        }
        return PwlResistor(std::move(pts));
    }
    throw ConfigError("unknown law '" + law + "'");
}

json waveform_to_json(const Waveform& w) {
    return std::visit(Overloaded{
                          [](const Sine& s) -> json {
                              return {{"type", "sine"},
                                      {"amplitude", s.amplitude},
                                      {"frequency_hz", s.frequency_hz},
                                      {"phase_rad", s.phase_rad}};
                          },
                          [](const Constant& c) -> json {
                              return {{"type", "constant"}, {"level", c.level}};
                          },
                          [](const Tabulated& t) -> json {
                              return {{"type", "tabulated"}, {"values", t.values}};
                          },
                      },
                      w);
}

Waveform waveform_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "sine") {
        return Sine{j.at("amplitude").get<double>(), j.at("frequency_hz").get<double>(),
                    j.value("phase_rad", 0.0)};
    }
    if (type == "constant") return Constant{j.at("level").get<double>()};
    if (type == "tabulated") return Tabulated{j.at("values").get<std::vector<double>>()};
    throw ConfigError("unknown waveform type '" + type + "'");
}

Form form_from_string(const std::string& s) {
    if (s == "Z") return Form::Impedance;
    if (s == "Y") return Form::Admittance;
    throw ConfigError("element form must be \"Z\" or \"Y\", got \"" + s + "\"");
}

Excitation kind_from_string(const std::string& s) {
    if (s == "V") return Excitation::Voltage;
    if (s == "I") return Excitation::Current;
    throw ConfigError("excitation kind must be \"V\" or \"I\", got \"" + s + "\"");
}

}  // namespace

ProblemDocument parse_problem_document(const std::string& text) {
    try {
        const json j = json::parse(text);
        ProblemDocument doc;
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            doc.grid = Grid(g.at("samples").get<std::size_t>(), g.at("dt").get<double>());
        }
        const auto& s = j.at("structure");
        auto& ic = doc.structure;
        ic.m = s.at("m").get<std::size_t>();
        ic.p = s.at("p").get<std::size_t>();
        ic.q = s.at("q").get<std::size_t>();
        const auto block = [&](const char* key) { return s.contains(key) ? s.at(key) : json(); };
        ic.M = matrix_from_json(block("M"), ic.q, ic.p, "M");
        ic.B_R = matrix_from_json(block("B_R"), ic.p, ic.m, "B_R");
        ic.B_G = matrix_from_json(block("B_G"), ic.q, ic.m, "B_G");
        ic.D = matrix_from_json(block("D"), ic.m, ic.m, "D");
        require_valid(ic);

        for (const auto& e : j.value("elements", json::array())) {
            ElementEntry entry;
            entry.name = e.at("name").get<std::string>();
            entry.law = law_from_json(e.at("law").get<std::string>(),
                                      e.value("params", json::object()));
            entry.form = form_from_string(e.at("form").get<std::string>());
            validate_law(entry.law);
            const auto natural = natural_form(entry.law);
            if (natural && *natural != entry.form) {
                throw ConfigError("element '" + entry.name + "' has law " + describe(entry.law) +
                                  " which cannot take form " + to_string(entry.form));
            }
            doc.elements.push_back(std::move(entry));
        }
        for (const auto& e : j.value("excitations", json::array())) {
            ExcitationEntry entry;
            entry.port = e.at("port").get<std::string>();
            entry.kind = kind_from_string(e.at("kind").get<std::string>());
            entry.label = e.value("label", (entry.kind == Excitation::Voltage ? "v_" : "i_") +
                                               entry.port);
            if (e.contains("waveform")) entry.waveform = waveform_from_json(e.at("waveform"));
            doc.excitations.push_back(std::move(entry));
        }
        doc.outputs = j.value("outputs", std::vector<std::string>{});
        return doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("problem document: ") + e.what());
    }
}

ProblemDocument load_problem_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open problem file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_problem_document(os.str());
}

std::string dump_problem_document(const ProblemDocument& doc) {
    json j;
    if (doc.grid) j["grid"] = {{"samples", doc.grid->samples()}, {"dt", doc.grid->dt()}};
    const auto& ic = doc.structure;
    j["structure"] = {{"m", ic.m},
                      {"p", ic.p},
                      {"q", ic.q},
                      {"M", matrix_to_json(ic.M)},
                      {"B_R", matrix_to_json(ic.B_R)},
                      {"B_G", matrix_to_json(ic.B_G)},
                      {"D", matrix_to_json(ic.D)}};
    json elements = json::array();
    for (const auto& e : doc.elements) {
        json entry = law_to_json(e.law);
        entry["name"] = e.name;
        entry["form"] = to_string(e.form);
        elements.push_back(std::move(entry));
    }
    j["elements"] = std::move(elements);
    json excitations = json::array();
    for (const auto& e : doc.excitations) {
        json entry = {{"port", e.port}, {"kind", to_string(e.kind)}, {"label", e.label}};
        if (e.waveform) entry["waveform"] = waveform_to_json(*e.waveform);
        excitations.push_back(std::move(entry));
    }
    j["excitations"] = std::move(excitations);
    j["outputs"] = doc.outputs;
    return j.dump(2) + "\n";
}

void save_problem_document(const ProblemDocument& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << dump_problem_document(doc);
}

Problem to_problem(const ProblemDocument& doc) {
    if (!doc.grid) throw ConfigError("problem document has no grid");
    const Grid grid = *doc.grid;
    const auto& ic = doc.structure;
    require_valid(ic);

    std::vector<ElementLaw> r_laws, g_laws;
    std::vector<std::string> i_labels, v_labels;
    for (const auto& e : doc.elements) {
        if (e.form == Form::Impedance) {
            r_laws.push_back(e.law);
            i_labels.push_back("i_" + e.name);
        } else {
            g_laws.push_back(e.law);
            v_labels.push_back("v_" + e.name);
        }
    }
    if (r_laws.size() != ic.p || g_laws.size() != ic.q) {
        throw ConfigError("document lists " + std::to_string(r_laws.size()) + " Z and " +
                          std::to_string(g_laws.size()) + " Y elements, structure expects p = " +
                          std::to_string(ic.p) + ", q = " + std::to_string(ic.q));
    }
    if (doc.excitations.size() != ic.m) {
        throw ConfigError("document lists " + std::to_string(doc.excitations.size()) +
                          " excitations, structure expects m = " + std::to_string(ic.m));
    }
    std::vector<PeriodicSignal> u;
    std::vector<std::string> u_labels;
    for (const auto& e : doc.excitations) {
        if (!e.waveform) throw ConfigError("port '" + e.port + "' has no waveform");
        u.push_back(make_waveform(*e.waveform, grid));
        u_labels.push_back(e.label);
    }
    std::vector<std::string> y_labels = doc.outputs;
    if (y_labels.empty()) {
        for (std::size_t k = 0; k < ic.m; ++k) y_labels.push_back("y" + std::to_string(k));
    }
    if (y_labels.size() != ic.m) {
        throw ConfigError("document lists " + std::to_string(y_labels.size()) +
                          " outputs, structure expects m = " + std::to_string(ic.m));
    }
    Problem problem{grid,
                    ic,
                    DiagonalOperator(Form::Impedance, std::move(r_laws)),
                    DiagonalOperator(Form::Admittance, std::move(g_laws)),
                    SignalBundle::from_channels(grid, u, std::move(u_labels)),
                    std::move(i_labels),
                    std::move(v_labels),
                    std::move(y_labels)};
    validate_problem(problem);
    return problem;
}

ProblemDocument make_document(const Netlist& netlist, const DerivedHybrid& derived,
                              std::optional<Grid> grid,
                              const std::map<std::string, Waveform>& waveforms) {
    ProblemDocument doc;
    doc.grid = grid;
    doc.structure = derived.ic;
    for (const auto b : derived.impedance_elements) {
        const auto& br = netlist.branches[b];
        doc.elements.push_back({br.name, element_law(br, Form::Impedance), Form::Impedance});
    }
    for (const auto b : derived.admittance_elements) {
        const auto& br = netlist.branches[b];
        doc.elements.push_back({br.name, element_law(br, Form::Admittance), Form::Admittance});
    }
    for (const auto b : derived.ports) {
        const auto& br = netlist.branches[b];
        const Excitation kind = derived.partition.excitations.at(br.name);
        const auto [in_label, out_label] = port_labels(br, kind);
        ExcitationEntry entry{br.name, kind, in_label, std::nullopt};
        if (const auto it = waveforms.find(br.name); it != waveforms.end()) {
            entry.waveform = it->second;
        }
        doc.excitations.push_back(std::move(entry));
        doc.outputs.push_back(out_label);
    }
    for (const auto& [name, w] : waveforms) {
        const auto b = netlist.find(name);
        if (!b || netlist.branches[*b].kind != BranchKind::Port) {
            throw ConfigError("waveform given for unknown port '" + name + "'");
        }
    }
    return doc;
}

}  // namespace pmono
