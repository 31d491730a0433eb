#pragma once

// Backward-Euler time marching, used as an independent check on the periodic
// solver. Each step replaces every derivative by a one-step backward
// difference against the stored history, which turns every law into a static
// (affine) one. The resulting one-sample inclusion is solved by the same
// Condat-Vu kernel, warm-started from the previous step.

#include "pmono/error.hpp"
#include "pmono/solver.hpp"

#include <cstddef>
#include <optional>

namespace pmono {

class StepNonConvergence : public Error {
public:
    StepNonConvergence(std::size_t step, const std::string& what) : Error(what), step_(step) {}
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

struct MarchConfig {
    std::size_t periods = 50;
    std::optional<double> tau;    // defaults scaled by march_impedance_scale
    std::optional<double> sigma;
    double step_tol = 1e-10;
    std::size_t step_max_iters = 1000000;
    std::size_t check_every = 5;
};

struct MarchResult {
    SignalBundle i;  // final period
    SignalBundle v;
    SignalBundle y;
    std::size_t steps = 0;
    std::size_t total_iterations = 0;
};

/// Marches `periods` periods from a zero state and returns the last one.
/// Zero periods returns the zero state (and y = D u).
MarchResult backward_euler_march(const Problem& problem, const MarchConfig& config = {});

/// Ratio of the largest impedance-row offset (a voltage) to the largest
/// admittance-row offset (a current), clamped to [1e-6, 1e6]; 1 when either
/// vanishes. The default per-step sizes are tau = 0.99/(||M|| s) and
/// sigma = 0.99 s/||M||.
double march_impedance_scale(const Problem& problem);

/// Ideal diode impedance with on-resistance eps and off-conductance eps.
PwlResistor smoothed_diode_impedance(double eps);

/// Replaces every ideal diode law (either form) by its smoothed curve.
Problem smooth_diodes(const Problem& problem, double eps);

}  // namespace pmono
