#include "pmono/elements.hpp"

#include "pmono/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pmono {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_nonnegative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string(name) + " must be finite and nonnegative");
    }
}

void require_positive_step(double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw ConfigError("resolvent step must be positive and finite");
    }
}

std::span<const double> row_of(const Samples& m, Eigen::Index r) {
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

std::span<double> row_of(Samples& m, Eigen::Index r) {
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

std::string to_string(Form form) {
    return form == Form::Impedance ? "Z" : "Y";
}

// -----------------------------------------------------------------------------
// PwlResistor
// -----------------------------------------------------------------------------

PwlResistor::PwlResistor(std::vector<PwlPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
        throw ConfigError("piecewise-linear curve needs at least two breakpoints");
    }
    for (std::size_t j = 0; j < points_.size(); ++j) {
        if (!std::isfinite(points_[j].x) || !std::isfinite(points_[j].y)) {
            throw ConfigError("piecewise-linear breakpoint " + std::to_string(j) +
                              " is not finite");
        }
        if (j == 0) continue;
        const auto& a = points_[j - 1];
        const auto& b = points_[j];
        if (b.x < a.x || b.y < a.y) {
            throw ConfigError("piecewise-linear curve decreases between breakpoints " +
                              std::to_string(j - 1) + " and " + std::to_string(j));
        }
        if (b.x == a.x && b.y == a.y) {
            throw ConfigError("piecewise-linear breakpoints " + std::to_string(j - 1) + " and " +
                              std::to_string(j) + " coincide");
        }
    }
}

PwlResistor PwlResistor::inverse() const {
    std::vector<PwlPoint> swapped;
    swapped.reserve(points_.size());
    for (const auto& p : points_) swapped.push_back({p.y, p.x});
    return PwlResistor(std::move(swapped));
}

double PwlResistor::resolve(double alpha, double s) const {
    // x + alpha f(x) is strictly increasing along the arc, so each breakpoint
    // maps to a strictly increasing level and the inverse is linear between
    // consecutive levels.
    const auto level = [alpha](const PwlPoint& p) { return p.x + alpha * p.y; };
    const std::size_t n = points_.size();

    const auto& first = points_.front();
    if (s <= level(first)) {
        const double dx = points_[1].x - first.x;
        const double dy = points_[1].y - first.y;
        const double t = (s - level(first)) / (dx + alpha * dy);
        return first.x + t * dx;
    }
    const auto& last = points_.back();
    if (s >= level(last)) {
        const double dx = last.x - points_[n - 2].x;
        const double dy = last.y - points_[n - 2].y;
        const double t = (s - level(last)) / (dx + alpha * dy);
        return last.x + t * dx;
    }
    std::size_t j = 0;
    while (j + 1 < n && level(points_[j + 1]) < s) ++j;
    const auto& a = points_[j];
    const auto& b = points_[j + 1];
    const double frac = (s - level(a)) / (level(b) - level(a));
    return a.x + frac * (b.x - a.x);
}

std::optional<double> PwlResistor::evaluate(double x) const {
    const std::size_t n = points_.size();
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (points_[j].x == points_[j + 1].x && x == points_[j].x) return std::nullopt;
    }
    const auto& first = points_.front();
    const auto& last = points_.back();
    const bool left_vertical = points_[1].x == first.x;
    const bool right_vertical = points_[n - 2].x == last.x;
    if (left_vertical && x <= first.x) return std::nullopt;
    if (right_vertical && x >= last.x) return std::nullopt;

    if (x < first.x) {
        const double slope = (points_[1].y - first.y) / (points_[1].x - first.x);
        return first.y + (x - first.x) * slope;
    }
    if (x > last.x) {
        const double slope = (last.y - points_[n - 2].y) / (last.x - points_[n - 2].x);
        return last.y + (x - last.x) * slope;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const auto& a = points_[j];
        const auto& b = points_[j + 1];
        if (a.x < b.x && a.x <= x && x <= b.x) {
            return a.y + (x - a.x) * (b.y - a.y) / (b.x - a.x);
        }
    }
    return std::nullopt;
}

// -----------------------------------------------------------------------------
// Law metadata
// -----------------------------------------------------------------------------

void validate_law(const ElementLaw& law) {
    std::visit(Overloaded{
                   [](const DiodeImpedance&) {},
                   [](const DiodeAdmittance&) {},
                   [](const ResistorImpedance& r) { require_nonnegative(r.resistance, "resistance"); },
                   [](const ResistorAdmittance& g) {
                       require_nonnegative(g.conductance, "conductance");
                   },
                   [](const CapacitorAdmittance& c) {
                       require_nonnegative(c.capacitance, "capacitance");
                   },
                   [](const InductorImpedance& l) {
                       require_nonnegative(l.inductance, "inductance");
                   },
                   [](const ParallelRCImpedance& rc) {
                       require_nonnegative(rc.resistance, "resistance");
                       require_nonnegative(rc.capacitance, "capacitance");
                   },
                   [](const PwlResistor&) {},  // checked on construction
               },
               law);
}

std::optional<Form> natural_form(const ElementLaw& law) {
    return std::visit(Overloaded{
                          [](const DiodeImpedance&) -> std::optional<Form> { return Form::Impedance; },
                          [](const DiodeAdmittance&) -> std::optional<Form> { return Form::Admittance; },
                          [](const ResistorImpedance&) -> std::optional<Form> { return Form::Impedance; },
                          [](const ResistorAdmittance&) -> std::optional<Form> { return Form::Admittance; },
                          [](const CapacitorAdmittance&) -> std::optional<Form> { return Form::Admittance; },
                          [](const InductorImpedance&) -> std::optional<Form> { return Form::Impedance; },
                          [](const ParallelRCImpedance&) -> std::optional<Form> { return Form::Impedance; },
                          [](const PwlResistor&) -> std::optional<Form> { return std::nullopt; },
                      },
                      law);
}

std::string describe(const ElementLaw& law) {
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const DiodeImpedance&) { os << "diode impedance"; },
                   [&](const DiodeAdmittance&) { os << "diode admittance"; },
                   [&](const ResistorImpedance& r) { os << "resistor R=" << r.resistance; },
                   [&](const ResistorAdmittance& g) { os << "resistor G=" << g.conductance; },
                   [&](const CapacitorAdmittance& c) { os << "capacitor C=" << c.capacitance; },
                   [&](const InductorImpedance& l) { os << "inductor L=" << l.inductance; },
                   [&](const ParallelRCImpedance& rc) {
                       os << "parallel RC R=" << rc.resistance << " C=" << rc.capacitance;
                   },
                   [&](const PwlResistor& p) { os << "pwl (" << p.points().size() << " points)"; },
               },
               law);
    return os.str();
}

bool is_dynamic(const ElementLaw& law) {
    return std::holds_alternative<CapacitorAdmittance>(law) ||
           std::holds_alternative<InductorImpedance>(law) ||
           std::holds_alternative<ParallelRCImpedance>(law);
}

// -----------------------------------------------------------------------------
// PeriodicFirstOrderSolve
// -----------------------------------------------------------------------------

PeriodicFirstOrderSolve::PeriodicFirstOrderSolve(double a, double b, double dt,
                                                 std::size_t samples)
    : samples_(samples) {
    if (!(a >= 0.0) || !(b > 0.0) || !(dt > 0.0)) {
        throw NumericalError("periodic first-order system needs a >= 0, b > 0 and dt > 0");
    }
    // (a/dt + b) w(k) - (a/dt) w(k-1) = r(k)
    const double kappa = a / dt;
    decay_ = kappa / (kappa + b);
    gain_ = 1.0 / (kappa + b);
    const double closure = 1.0 - std::pow(decay_, static_cast<double>(samples));
    if (!(closure > 0.0)) {
        std::ostringstream os;
        os << "periodic first-order system is numerically singular (recurrence factor "
           << decay_ << ", condition estimate " << 1.0 / std::max(closure, 1e-300) << ")";
        throw NumericalError(os.str());
    }
    wrap_ = 1.0 / closure;
}

void PeriodicFirstOrderSolve::apply(std::span<const double> rhs, std::span<double> out) const {
    if (rhs.size() != samples_ || out.size() != samples_) {
        throw DimensionError("periodic first-order solve: length mismatch");
    }
    // One pass from a zero state gives w(N-1) up to the homogeneous part
    // c^N w(-1); periodicity w(-1) = w(N-1) closes it.
    double w = 0.0;
    for (std::size_t k = 0; k < samples_; ++k) w = decay_ * w + gain_ * rhs[k];
    w *= wrap_;
    for (std::size_t k = 0; k < samples_; ++k) {
        w = decay_ * w + gain_ * rhs[k];
        out[k] = w;
    }
}

// -----------------------------------------------------------------------------
// PreparedResolvent
// -----------------------------------------------------------------------------

PreparedResolvent::PreparedResolvent(const ElementLaw& law, double step, double dt,
                                     std::size_t samples)
    : kind_(Kind::Scale), dt_(dt), samples_(samples), step_(step) {
    require_positive_step(step);
    validate_law(law);
    std::visit(Overloaded{
                   [&](const DiodeImpedance&) { kind_ = Kind::Relu; },
                   [&](const DiodeAdmittance&) { kind_ = Kind::NegRelu; },
                   [&](const ResistorImpedance& r) { scale_ = 1.0 / (1.0 + step * r.resistance); },
                   [&](const ResistorAdmittance& g) { scale_ = 1.0 / (1.0 + step * g.conductance); },
                   [&](const CapacitorAdmittance& c) {
                       kind_ = Kind::FirstOrder;
                       solve_.emplace(step * c.capacitance, 1.0, dt, samples);
                   },
                   [&](const InductorImpedance& l) {
                       kind_ = Kind::FirstOrder;
                       solve_.emplace(step * l.inductance, 1.0, dt, samples);
                   },
                   [&](const ParallelRCImpedance& rc) {
                       // x + step R (RC nabla + 1)^-1 x = i: solve
                       // (RC nabla + 1 + step R) w = i, then x = (RC nabla + 1) w.
                       kind_ = Kind::ParallelRC;
                       rc_ = rc.resistance * rc.capacitance;
                       solve_.emplace(rc_, 1.0 + step * rc.resistance, dt, samples);
                   },
                   [&](const PwlResistor& p) {
                       kind_ = Kind::Pwl;
                       curve_ = p;
                   },
               },
               law);
}

void PreparedResolvent::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = in.size();
    if (out.size() != n) throw DimensionError("resolvent: output length mismatch");
    switch (kind_) {
    case Kind::Relu:
        for (std::size_t k = 0; k < n; ++k) out[k] = in[k] > 0.0 ? in[k] : 0.0;
        break;
    case Kind::NegRelu:
        for (std::size_t k = 0; k < n; ++k) out[k] = in[k] < 0.0 ? in[k] : 0.0;
        break;
    case Kind::Scale:
        for (std::size_t k = 0; k < n; ++k) out[k] = scale_ * in[k];
        break;
    case Kind::FirstOrder:
        solve_->apply(in, out);
        break;
    case Kind::ParallelRC: {
        solve_->apply(in, out);
        if (rc_ == 0.0) break;
        const double kappa = rc_ / dt_;
        const double wrapped = out[n - 1];
        for (std::size_t k = n - 1; k > 0; --k) out[k] += kappa * (out[k] - out[k - 1]);
        out[0] += kappa * (out[0] - wrapped);
        break;
    }
    case Kind::Pwl:
        for (std::size_t k = 0; k < n; ++k) out[k] = curve_->resolve(step_, in[k]);
        break;
    }
}

PeriodicSignal PreparedResolvent::apply(const PeriodicSignal& in) const {
    if (in.size() != samples_) throw DimensionError("resolvent prepared for a different grid");
    std::vector<double> out(in.size());
    apply(in.values(), out);
    return PeriodicSignal(in.grid(), std::move(out));
}

// -----------------------------------------------------------------------------
// Named resolvents
// -----------------------------------------------------------------------------

namespace {

PeriodicSignal resolve_with(const ElementLaw& law, double step, const PeriodicSignal& x) {
    return PreparedResolvent(law, step, x.grid().dt(), x.grid().samples()).apply(x);
}

}  // namespace

PeriodicSignal resolvent_diode_impedance(double tau, const PeriodicSignal& i) {
    return resolve_with(DiodeImpedance{}, tau, i);
}

PeriodicSignal resolvent_diode_admittance(double sigma, const PeriodicSignal& v) {
    return resolve_with(DiodeAdmittance{}, sigma, v);
}

double resolvent_pwl(const PwlResistor& law, double alpha, double s) {
    require_positive_step(alpha);
    return law.resolve(alpha, s);
}

PeriodicSignal resolvent_pwl(const PwlResistor& law, double alpha, const PeriodicSignal& s) {
    return resolve_with(law, alpha, s);
}

PeriodicSignal resolvent_parallel_rc(double resistance, double capacitance, double tau,
                                     const PeriodicSignal& i) {
    return resolve_with(ParallelRCImpedance{resistance, capacitance}, tau, i);
}

PeriodicSignal resolvent_capacitor_admittance(double capacitance, double sigma,
                                              const PeriodicSignal& v) {
    return resolve_with(CapacitorAdmittance{capacitance}, sigma, v);
}

PeriodicSignal resolvent_inductor_impedance(double inductance, double tau,
                                            const PeriodicSignal& i) {
    return resolve_with(InductorImpedance{inductance}, tau, i);
}

// -----------------------------------------------------------------------------
// forward_eval
// -----------------------------------------------------------------------------

std::optional<PeriodicSignal> forward_eval(const ElementLaw& law, const PeriodicSignal& input) {
    validate_law(law);
    const Grid& grid = input.grid();
    const auto x = input.values();
    std::vector<double> out(x.size(), 0.0);

    const auto scaled = [&](double g) {
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = g * x[k];
    };
    const auto derivative = [&](double g) {
        backward_difference(x, grid.dt(), out);
        for (auto& v : out) v *= g;
    };

    const bool ok = std::visit(
        Overloaded{
            [&](const DiodeImpedance&) {
                return std::all_of(x.begin(), x.end(), [](double i) { return i > 0.0; });
            },
            [&](const DiodeAdmittance&) {
                return std::all_of(x.begin(), x.end(), [](double v) { return v < 0.0; });
            },
            [&](const ResistorImpedance& r) { scaled(r.resistance); return true; },
            [&](const ResistorAdmittance& g) { scaled(g.conductance); return true; },
            [&](const CapacitorAdmittance& c) { derivative(c.capacitance); return true; },
            [&](const InductorImpedance& l) { derivative(l.inductance); return true; },
            [&](const ParallelRCImpedance& rc) {
                PeriodicFirstOrderSolve solve(rc.resistance * rc.capacitance, 1.0, grid.dt(),
                                              grid.samples());
                solve.apply(x, out);
                for (auto& v : out) v *= rc.resistance;
                return true;
            },
            [&](const PwlResistor& p) {
                for (std::size_t k = 0; k < x.size(); ++k) {
                    const auto y = p.evaluate(x[k]);
                    if (!y) return false;
                    out[k] = *y;
                }
                return true;
            },
        },
        law);
    if (!ok) return std::nullopt;
    return PeriodicSignal(grid, std::move(out));
}

// -----------------------------------------------------------------------------
// DiagonalOperator
// -----------------------------------------------------------------------------

DiagonalOperator::DiagonalOperator(Form form, std::vector<ElementLaw> laws)
    : form_(form), laws_(std::move(laws)) {
    for (std::size_t k = 0; k < laws_.size(); ++k) {
        validate_law(laws_[k]);
        const auto natural = natural_form(laws_[k]);
        if (natural && *natural != form_) {
            throw ConfigError("law " + std::to_string(k) + " (" + describe(laws_[k]) +
                              ") cannot sit in the " +
                              (form_ == Form::Impedance ? "impedance" : "admittance") + " block");
        }
    }
}

PreparedDiagonal DiagonalOperator::prepare(double step, double dt, std::size_t samples) const {
    std::vector<PreparedResolvent> parts;
    parts.reserve(laws_.size());
    for (const auto& law : laws_) parts.emplace_back(law, step, dt, samples);
    return PreparedDiagonal(std::move(parts));
}

void PreparedDiagonal::apply(const Samples& in, Samples& out) const {
    if (static_cast<std::size_t>(in.rows()) != parts_.size()) {
        throw DimensionError("diagonal resolvent: " + std::to_string(in.rows()) +
                             " channels for " + std::to_string(parts_.size()) + " laws");
    }
    out.resize(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.rows(); ++c) {
        parts_[static_cast<std::size_t>(c)].apply(row_of(in, c), row_of(out, c));
    }
}

SignalBundle diagonal_resolvent(const DiagonalOperator& op, double step, const SignalBundle& z) {
    if (z.channels() != op.size()) {
        throw DimensionError("diagonal resolvent: " + std::to_string(z.channels()) +
                             " channels for " + std::to_string(op.size()) + " laws");
    }
    const auto prepared = op.prepare(step, z.grid().dt(), z.grid().samples());
    Samples out;
    prepared.apply(z.data(), out);
    return SignalBundle(z.grid(), std::move(out), z.labels());
}

SignalBundle offset_resolvent(const DiagonalOperator& op, double step, const SignalBundle& z,
                              const SignalBundle& offset) {
    if (!(z.grid() == offset.grid()) || z.channels() != offset.channels()) {
        throw DimensionError("offset resolvent: offset shape does not match the input");
    }
    Samples shifted = z.data() + step * offset.data();
    return diagonal_resolvent(op, step, SignalBundle(z.grid(), std::move(shifted), z.labels()));
}

std::optional<SignalBundle> forward_eval(const DiagonalOperator& op, const SignalBundle& z) {
    if (z.channels() != op.size()) {
        throw DimensionError("forward_eval: channel/law count mismatch");
    }
    SignalBundle out(z.grid(), z.labels());
    for (std::size_t c = 0; c < op.size(); ++c) {
        const auto y = forward_eval(op.laws()[c], z.channel(c));
        if (!y) return std::nullopt;
        const auto src = y->values();
        std::copy(src.begin(), src.end(), out.row(c).begin());
    }
    return out;
}

}  // namespace pmono
