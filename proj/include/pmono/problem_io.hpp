#pragma once

// Problem documents: the serialized form of an inclusion (grid, structure
// blocks, ordered element laws, per-port excitations) as JSON.
//
//   {
//     "grid": {"samples": 200, "dt": 1e-4},
//     "structure": {"m": 2, "p": 3, "q": 2,
//                   "M": [...q*p, row-major...], "B_R": [...], "B_G": [...], "D": [...]},
//     "elements": [{"name": "RC0", "law": "parallel_rc_impedance",
//                   "params": {"R": 1000, "C": 1e-5}, "form": "Z"}, ...],
//     "excitations": [{"port": "p", "kind": "V", "label": "v_p",
//                      "waveform": {"type": "sine", "amplitude": 240,
//                                   "frequency_hz": 50, "phase_rad": 0}}, ...],
//     "outputs": ["i_p", "v_q"]
//   }
//
// Impedance-form elements come first (the i block), then admittance-form
// elements (the v block). Matrices may also be given as nested row arrays.

#include "pmono/netlist.hpp"
#include "pmono/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pmono {

struct ElementEntry {
    std::string name;
    ElementLaw law;
    Form form = Form::Impedance;
};

struct ExcitationEntry {
    std::string port;
    Excitation kind = Excitation::Voltage;
    std::string label;
    std::optional<Waveform> waveform;
};

struct ProblemDocument {
    std::optional<Grid> grid;
    Interconnection structure;
    std::vector<ElementEntry> elements;
    std::vector<ExcitationEntry> excitations;
    std::vector<std::string> outputs;
};

ProblemDocument parse_problem_document(const std::string& text);
ProblemDocument load_problem_document(const std::string& path);
std::string dump_problem_document(const ProblemDocument& doc);
void save_problem_document(const ProblemDocument& doc, const std::string& path);

/// Builds the solver problem. Requires a grid and a waveform for every port.
Problem to_problem(const ProblemDocument& doc);

/// Document for a derived netlist; grid and waveforms are optional.
ProblemDocument make_document(const Netlist& netlist, const DerivedHybrid& derived,
                              std::optional<Grid> grid,
                              const std::map<std::string, Waveform>& waveforms);

}  // namespace pmono
