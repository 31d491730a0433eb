#pragma once

// =============================================================================
// Netlists and element extraction
// =============================================================================
// A netlist is a graph of oriented branches: external ports, one-port
// elements and transformer windings. Every port and element is treated as a
// terminal pair of a lossless box of wires and transformers, oriented so that
// v_k i_k is the power extracted from the box (current flows from the + node
// through the branch to the - node). Choosing one independent variable per
// terminal pair (a partition) and eliminating everything else gives the
// hybrid matrix H, from which the inclusion data is read.
//
// Line format, one branch per line, '#' starts a comment:
//
//   PORT <name> <n+> <n->
//   R    <name> <n+> <n-> <ohms>
//   C    <name> <n+> <n-> <farads>
//   L    <name> <n+> <n-> <henries>
//   D    <name> <anode> <cathode>
//   RC   <name> <n+> <n-> <ohms> <farads>
//   PWL  <name> <n+> <n-> <i0> <v0> <i1> <v1> ...
//   XFMR <group> <name> <n+> <n-> <turns>
//   FORM <element> Z|Y
//   EXCITE <port> V|I
//
// Nodes named 0 or gnd are used as the reference of their component.
// =============================================================================

#include "pmono/elements.hpp"
#include "pmono/signal.hpp"
#include "pmono/solver.hpp"
#include "pmono/structure.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmono {

enum class BranchKind { Port, Resistor, Capacitor, Inductor, Diode, ParallelRC, Pwl, Winding };

enum class Excitation { Voltage, Current };

std::string to_string(Excitation kind);

struct Branch {
    std::string name;
    BranchKind kind = BranchKind::Port;
    std::size_t plus = 0;
    std::size_t minus = 0;
    std::vector<double> values;  // parameters; turns for windings
    std::string group;           // winding group
    std::size_t line = 0;

    [[nodiscard]] bool is_element() const noexcept {
        return kind != BranchKind::Port && kind != BranchKind::Winding;
    }
};

struct Netlist {
    std::vector<std::string> nodes;
    std::vector<Branch> branches;
    std::optional<std::size_t> ground;
    std::map<std::string, Form> form_pins;
    std::map<std::string, Excitation> excite_pins;

    [[nodiscard]] std::vector<std::size_t> ports() const;
    [[nodiscard]] std::vector<std::size_t> elements() const;
    [[nodiscard]] std::vector<std::size_t> windings() const;
    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;
};

Netlist parse_netlist(std::string_view text);
Netlist load_netlist(const std::string& path);

/// Per-element form and per-port excitation kind, keyed by name.
struct Partition {
    std::map<std::string, Form> forms;
    std::map<std::string, Excitation> excitations;

    [[nodiscard]] std::string describe(const Netlist& netlist) const;
    bool operator==(const Partition&) const = default;
};

/// Forms an element of this kind may take, impedance first.
std::vector<Form> admissible_forms(const Branch& branch);

/// The law of an element branch in the requested form.
ElementLaw element_law(const Branch& branch, Form form);

struct DerivedHybrid {
    HybridMatrix H;
    std::vector<std::string> row_labels;     // (y; z~)
    std::vector<std::string> column_labels;  // (u; z)
    Interconnection ic;
    Partition partition;
    std::vector<std::size_t> ports;                // branch indices, netlist order
    std::vector<std::size_t> impedance_elements;  // i block
    std::vector<std::size_t> admittance_elements; // v block
};

/// Relative pivot threshold separating singular systems from roundoff.
inline constexpr double kPivotTolerance = 1e-10;

/// Throws RepresentationError when the partition admits no hybrid form.
DerivedHybrid derive_hybrid(const Netlist& netlist, const Partition& partition);

/// Depth-first search over admissible partitions. Elements and ports are
/// visited in netlist order, impedance before admittance and voltage before
/// current. Pins in `fixed` and in the netlist itself are respected.
Partition partition_search(const Netlist& netlist, const Partition& fixed = {});

/// Labels of the excitation/response pair of a port, e.g. ("v_p", "i_p").
std::pair<std::string, std::string> port_labels(const Branch& port, Excitation kind);

Problem compile(const Netlist& netlist, const Partition& partition, const Grid& grid,
                const std::map<std::string, PeriodicSignal>& excitations);
Problem compile(const Netlist& netlist, const Partition& partition, const Grid& grid,
                const std::map<std::string, Waveform>& excitations);

}  // namespace pmono
