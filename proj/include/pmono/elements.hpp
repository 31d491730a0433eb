#pragma once

// =============================================================================
// Maximal monotone one-port device laws and their resolvents
// =============================================================================
// Every law is stored in the form it enters the inclusion: impedance laws map
// current to voltage (R block), admittance laws map voltage to current
// (G block). The solver only ever touches a law through its resolvent
// (Id + a A)^-1, which is single-valued even for the ideal diode.
// =============================================================================

#include "pmono/signal.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pmono {

enum class Form { Impedance, Admittance };

std::string to_string(Form form);

// -----------------------------------------------------------------------------
// Law types
// -----------------------------------------------------------------------------

/// Ideal diode, v in R_D(i): {0} for i > 0, (-inf, 0] at i = 0.
struct DiodeImpedance {};

/// Relational inverse of DiodeImpedance: {0} for v < 0, [0, inf) at v = 0.
struct DiodeAdmittance {};

struct ResistorImpedance {
    double resistance = 0.0;
};

struct ResistorAdmittance {
    double conductance = 0.0;
};

/// i = C dv/dt.
struct CapacitorAdmittance {
    double capacitance = 0.0;
};

/// v = L di/dt.
struct InductorImpedance {
    double inductance = 0.0;
};

/// Resistor and capacitor in parallel, as the impedance R (RC d/dt + 1)^-1.
struct ParallelRCImpedance {
    double resistance = 0.0;
    double capacitance = 0.0;
};

struct PwlPoint {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const PwlPoint&) const = default;
};

/// Continuous piecewise-linear monotone curve y = f(x) through the given
/// breakpoints. Vertical and horizontal segments are allowed; the first and
/// last segments are extended to infinity along their own direction, so the
/// graph has no endpoints.
class PwlResistor {
public:
    explicit PwlResistor(std::vector<PwlPoint> points);

    [[nodiscard]] const std::vector<PwlPoint>& points() const noexcept { return points_; }

    /// The graph with x and y swapped (impedance <-> admittance).
    [[nodiscard]] PwlResistor inverse() const;

    /// The unique x with s in x + alpha f(x). Exact segment arithmetic.
    [[nodiscard]] double resolve(double alpha, double s) const;

    /// f(x) when single-valued at x; nullopt on a vertical segment or outside
    /// the domain.
    [[nodiscard]] std::optional<double> evaluate(double x) const;

    bool operator==(const PwlResistor&) const = default;

private:
    std::vector<PwlPoint> points_;
};

using ElementLaw = std::variant<DiodeImpedance, DiodeAdmittance, ResistorImpedance,
                                ResistorAdmittance, CapacitorAdmittance, InductorImpedance,
                                ParallelRCImpedance, PwlResistor>;

/// Throws ConfigError when a parameter breaks monotonicity.
void validate_law(const ElementLaw& law);

/// The form a law is written in; nullopt for curves that fit either block.
std::optional<Form> natural_form(const ElementLaw& law);

std::string describe(const ElementLaw& law);

/// Whether the law involves the time derivative.
bool is_dynamic(const ElementLaw& law);

// -----------------------------------------------------------------------------
// Periodic first-order solve
// -----------------------------------------------------------------------------

/// Solves (a nabla + b) w = r for a periodic w on a uniform grid with a >= 0 and
/// b > 0. The circulant system is a first-order recurrence
/// w(k) = c w(k-1) + d r(k), closed by periodicity. Coefficients depend only on
/// (a, b, dt, N) and are computed once.
class PeriodicFirstOrderSolve {
public:
    PeriodicFirstOrderSolve(double a, double b, double dt, std::size_t samples);

    void apply(std::span<const double> rhs, std::span<double> out) const;

private:
    double decay_ = 0.0;      // c
    double gain_ = 0.0;       // d
    double wrap_ = 1.0;       // 1 / (1 - c^N)
    std::size_t samples_ = 0;
};

// -----------------------------------------------------------------------------
// Resolvents
// -----------------------------------------------------------------------------

/// (Id + step A)^-1 for one law on one grid, ready to be applied many times.
class PreparedResolvent {
public:
    PreparedResolvent(const ElementLaw& law, double step, double dt, std::size_t samples);

    void apply(std::span<const double> in, std::span<double> out) const;
    [[nodiscard]] PeriodicSignal apply(const PeriodicSignal& in) const;

private:
    enum class Kind { Relu, NegRelu, Scale, FirstOrder, ParallelRC, Pwl };

    Kind kind_;
    double scale_ = 1.0;
    double dt_ = 1.0;
    double rc_ = 0.0;
    std::size_t samples_;
    std::optional<PeriodicFirstOrderSolve> solve_;
    std::optional<PwlResistor> curve_;
    double step_ = 0.0;
};

PeriodicSignal resolvent_diode_impedance(double tau, const PeriodicSignal& i);
PeriodicSignal resolvent_diode_admittance(double sigma, const PeriodicSignal& v);
double resolvent_pwl(const PwlResistor& law, double alpha, double s);
PeriodicSignal resolvent_pwl(const PwlResistor& law, double alpha, const PeriodicSignal& s);
PeriodicSignal resolvent_parallel_rc(double resistance, double capacitance, double tau,
                                     const PeriodicSignal& i);
PeriodicSignal resolvent_capacitor_admittance(double capacitance, double sigma,
                                              const PeriodicSignal& v);
PeriodicSignal resolvent_inductor_impedance(double inductance, double tau,
                                            const PeriodicSignal& i);

/// Applies the law to the input; nullopt when any sample sits on a
/// multivalued point or outside the law's domain.
std::optional<PeriodicSignal> forward_eval(const ElementLaw& law, const PeriodicSignal& input);

// -----------------------------------------------------------------------------
// Diagonal concatenation
// -----------------------------------------------------------------------------

class PreparedDiagonal;

/// Block-diagonal operator acting channelwise. Every law must be compatible
/// with the block form (impedances in R, admittances in G).
class DiagonalOperator {
public:
    DiagonalOperator() : form_(Form::Impedance) {}
    DiagonalOperator(Form form, std::vector<ElementLaw> laws);

    [[nodiscard]] Form form() const noexcept { return form_; }
    [[nodiscard]] std::size_t size() const noexcept { return laws_.size(); }
    [[nodiscard]] const std::vector<ElementLaw>& laws() const noexcept { return laws_; }

    [[nodiscard]] PreparedDiagonal prepare(double step, double dt, std::size_t samples) const;

private:
    Form form_;
    std::vector<ElementLaw> laws_;
};

class PreparedDiagonal {
public:
    explicit PreparedDiagonal(std::vector<PreparedResolvent> parts) : parts_(std::move(parts)) {}

    [[nodiscard]] std::size_t size() const noexcept { return parts_.size(); }

    /// Row c of `out` becomes the resolvent of law c applied to row c of `in`.
    void apply(const Samples& in, Samples& out) const;

private:
    std::vector<PreparedResolvent> parts_;
};

SignalBundle diagonal_resolvent(const DiagonalOperator& op, double step, const SignalBundle& z);

/// Resolvent of A - offset: the inputs are shifted by step * offset.
SignalBundle offset_resolvent(const DiagonalOperator& op, double step, const SignalBundle& z,
                              const SignalBundle& offset);

/// Channelwise forward evaluation; nullopt if any channel is not evaluable.
std::optional<SignalBundle> forward_eval(const DiagonalOperator& op, const SignalBundle& z);

}  // namespace pmono
