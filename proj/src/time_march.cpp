#include "pmono/time_march.hpp"

#include <algorithm>
#include <cmath>

namespace pmono {

namespace {

/// Static replacement of one law for a single backward-Euler step:
/// law(x) = static_law(x) + history_gain * memory, where memory is the
/// law's own previous value (voltage for RC, current for L, voltage for C).
struct Companion {
    ElementLaw static_law;
    double history_gain = 0.0;
    // For the parallel RC the remembered quantity is the element voltage,
    // v(k) = slope i(k) + slope (C/dt) v(k-1).
    bool remembers_output = false;
    double slope = 0.0;
};

Companion companion_of(const ElementLaw& law, double dt) {
    if (const auto* l = std::get_if<InductorImpedance>(&law)) {
        // v = (L/dt) i - (L/dt) i_prev
        return {ResistorImpedance{l->inductance / dt}, -l->inductance / dt, false, 0.0};
    }
    if (const auto* c = std::get_if<CapacitorAdmittance>(&law)) {
        // i = (C/dt) v - (C/dt) v_prev
        return {ResistorAdmittance{c->capacitance / dt}, -c->capacitance / dt, false, 0.0};
    }
    if (const auto* rc = std::get_if<ParallelRCImpedance>(&law)) {
        // (C/dt)(v - v_prev) + v/R = i
        if (rc->resistance == 0.0) return {ResistorImpedance{0.0}, 0.0, true, 0.0};
        const double slope = 1.0 / (rc->capacitance / dt + 1.0 / rc->resistance);
        return {ResistorImpedance{slope}, slope * rc->capacitance / dt, true, slope};
    }
    return {law, 0.0, false, 0.0};
}

}  // namespace

double march_impedance_scale(const Problem& problem) {
    if (problem.ic.p == 0 || problem.ic.q == 0 || problem.ic.m == 0) return 1.0;
    const double volts = (problem.ic.B_R * problem.u.data()).cwiseAbs().maxCoeff();
    const double amps = (problem.ic.B_G * problem.u.data()).cwiseAbs().maxCoeff();
    if (!(volts > 0.0) || !(amps > 0.0)) return 1.0;
    return std::clamp(volts / amps, 1e-6, 1e6);
}

PwlResistor smoothed_diode_impedance(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw ConfigError("diode smoothing parameter must be positive");
    }
    return PwlResistor({{-eps, -1.0}, {0.0, 0.0}, {1.0, eps}});
}

Problem smooth_diodes(const Problem& problem, double eps) {
    const PwlResistor z = smoothed_diode_impedance(eps);
    const PwlResistor y = z.inverse();
    auto swap_laws = [&](const DiagonalOperator& op) {
        std::vector<ElementLaw> laws = op.laws();
        for (auto& law : laws) {
            if (std::holds_alternative<DiodeImpedance>(law)) law = z;
            else if (std::holds_alternative<DiodeAdmittance>(law)) law = y;
        }
        return DiagonalOperator(op.form(), std::move(laws));
    };
    Problem out = problem;
    out.r_block = swap_laws(problem.r_block);
    out.g_block = swap_laws(problem.g_block);
    return out;
}

MarchResult backward_euler_march(const Problem& problem, const MarchConfig& config) {
    validate_problem(problem);
    const auto& ic = problem.ic;
    const Grid& grid = problem.grid;
    const double dt = grid.dt();
    const auto p = static_cast<Eigen::Index>(ic.p);
    const auto q = static_cast<Eigen::Index>(ic.q);

    std::vector<Companion> r_comp, g_comp;
    std::vector<ElementLaw> r_static, g_static;
    for (const auto& law : problem.r_block.laws()) {
        r_comp.push_back(companion_of(law, dt));
        r_static.push_back(r_comp.back().static_law);
    }
    for (const auto& law : problem.g_block.laws()) {
        g_comp.push_back(companion_of(law, dt));
        g_static.push_back(g_comp.back().static_law);
    }

    const double norm = operator_norm(ic.M);
    const double scale = march_impedance_scale(problem);
    const double base = norm == 0.0 ? 1.0 : 0.99 / norm;
    const double tau = config.tau.value_or(base / scale);
    const double sigma = config.sigma.value_or(base * scale);
    if (tau * sigma * norm * norm >= 1.0) {
        throw ConfigError("time-march step sizes violate tau*sigma*||M||^2 < 1");
    }
    const auto r = DiagonalOperator(Form::Impedance, r_static).prepare(tau, dt, 1);
    const auto g = DiagonalOperator(Form::Admittance, g_static).prepare(sigma, dt, 1);

    MarchResult result{SignalBundle(grid, problem.i_labels), SignalBundle(grid, problem.v_labels),
                       SignalBundle(grid, problem.y_labels), 0, 0};

    const std::size_t n_samples = grid.samples();
    const std::size_t total = config.periods * n_samples;
    const std::size_t last_period = total >= n_samples ? total - n_samples : 0;

    Samples i = Samples::Zero(p, 1);
    Samples v = Samples::Zero(q, 1);
    Eigen::VectorXd r_memory = Eigen::VectorXd::Zero(p);  // previous i or element voltage
    Eigen::VectorXd g_memory = Eigen::VectorXd::Zero(q);  // previous v

    CondatVuControl control;
    control.max_iters = config.step_max_iters;
    control.tol = config.step_tol;
    control.check_every = config.check_every;

    for (std::size_t n = 0; n < total; ++n) {
        const std::size_t k = n % n_samples;
        const Eigen::VectorXd u_k = problem.u.data().col(static_cast<Eigen::Index>(k));
        Samples r_offset = ic.B_R * u_k;
        Samples g_offset = ic.B_G * u_k;
        for (Eigen::Index c = 0; c < p; ++c) {
            r_offset(c, 0) -= r_comp[static_cast<std::size_t>(c)].history_gain * r_memory(c);
        }
        for (Eigen::Index c = 0; c < q; ++c) {
            g_offset(c, 0) -= g_comp[static_cast<std::size_t>(c)].history_gain * g_memory(c);
        }

        CondatVuSetup setup{r, g, ic.M, std::move(r_offset), std::move(g_offset), tau, sigma, 1.0};
        const auto outcome = run_condat_vu(setup, i, v, control);
        result.total_iterations += outcome.iterations;
        if (!outcome.converged) {
            throw StepNonConvergence(n, "time step " + std::to_string(n) + " did not converge in " +
                                            std::to_string(config.step_max_iters) + " iterations");
        }

        for (Eigen::Index c = 0; c < p; ++c) {
            const auto& comp = r_comp[static_cast<std::size_t>(c)];
            if (comp.remembers_output) {
                r_memory(c) = comp.slope * i(c, 0) + comp.history_gain * r_memory(c);
            } else {
                r_memory(c) = i(c, 0);
            }
        }
        for (Eigen::Index c = 0; c < q; ++c) g_memory(c) = v(c, 0);

        if (n >= last_period) {
            result.i.data().col(static_cast<Eigen::Index>(k)) = i.col(0);
            result.v.data().col(static_cast<Eigen::Index>(k)) = v.col(0);
        }
        ++result.steps;
    }

    const SignalBundle y = apply_output(ic, result.i, result.v, problem.u);
    result.y = SignalBundle(grid, y.data(), problem.y_labels);
    return result;
}

}  // namespace pmono
