#pragma once

// =============================================================================
// Condat-Vu primal-dual iteration for the monotone + skew inclusion
// =============================================================================
//
//   i+ = (Id + tau R~)^-1 (i - tau M^T v)
//   v+ = (Id + sigma G~)^-1 (v + sigma M (2 i+ - i))
//
// with R~(i) = R(i) - B_R u and G~(v) = G(v) - B_G u. The offsets enter as
// shifted resolvent inputs. Convergence needs tau sigma ||M||^2 < 1.
// =============================================================================

#include "pmono/elements.hpp"
#include "pmono/signal.hpp"
#include "pmono/structure.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmono {

struct Problem {
    Grid grid;
    Interconnection ic;
    DiagonalOperator r_block;  // p impedances
    DiagonalOperator g_block;  // q admittances
    SignalBundle u;            // m excitations
    std::vector<std::string> i_labels;
    std::vector<std::string> v_labels;
    std::vector<std::string> y_labels;
};

/// Throws DimensionError/ConfigError when the pieces do not fit together.
void validate_problem(const Problem& problem);

struct ResidualRecord {
    std::size_t iteration = 0;
    double residual = 0.0;
};

struct Checkpoint {
    std::size_t iteration;
    double residual;
    const Samples& i;
    const Samples& v;
};

struct SolverConfig {
    std::optional<double> tau;    // defaults from default_step_sizes
    std::optional<double> sigma;
    std::size_t max_iters = 500000;
    double tol = 1e-6;
    std::size_t check_every = 10;
    bool force_steps = false;     // run even when tau sigma ||M||^2 >= 1

    std::function<void(const Checkpoint&)> on_checkpoint;
    std::ostream* residual_log = nullptr;  // "iteration,residual" lines
};

struct SolverResult {
    SignalBundle i;
    SignalBundle v;
    SignalBundle y;
    /// An element of R(i) and of G(v) at the final iterate, read off the last
    /// resolvent step.
    SignalBundle r_values;
    SignalBundle g_values;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<ResidualRecord> residual_history;
    std::vector<std::string> warnings;
    double tau = 0.0;
    double sigma = 0.0;
};

/// tau = sigma = 0.99 / ||M||, or (1, 1) when M vanishes.
std::pair<double, double> default_step_sizes(const Matrix& M);

/// (||i+ - i|| + ||v+ - v||) / max(1, ||i+|| + ||v+||) in the discrete L2 norm.
double fixed_point_residual(const SignalBundle& prev_i, const SignalBundle& prev_v,
                            const SignalBundle& next_i, const SignalBundle& next_v);

/// L2 norm of the inclusion's left-hand side, or nullopt when a law is not
/// single-valued at (i, v).
std::optional<double> inclusion_residual(const Problem& problem, const SignalBundle& i,
                                         const SignalBundle& v);

SolverResult condat_vu_solve(const Problem& problem, const SolverConfig& config = {});

/// Starts from the supplied iterates instead of zero.
SolverResult condat_vu_solve(const Problem& problem, const SolverConfig& config,
                             SignalBundle i0, SignalBundle v0);

// -----------------------------------------------------------------------------
// Raw kernel, shared with the time-marching oracle
// -----------------------------------------------------------------------------

struct CondatVuSetup {
    const PreparedDiagonal& r;
    const PreparedDiagonal& g;
    const Matrix& M;
    Samples r_offset;  // B_R u
    Samples g_offset;  // B_G u
    double tau;
    double sigma;
    double weight;     // quadrature weight for norms (dt)
};

struct CondatVuControl {
    std::size_t max_iters = 500000;
    double tol = 1e-6;
    std::size_t check_every = 10;
    const std::function<void(const Checkpoint&)>* on_checkpoint = nullptr;
    std::ostream* residual_log = nullptr;
};

struct CondatVuOutcome {
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<ResidualRecord> history;
    Samples r_values;
    Samples g_values;
};

/// Iterates in place on (i, v). Throws DivergenceError on a non-finite iterate.
CondatVuOutcome run_condat_vu(const CondatVuSetup& setup, Samples& i, Samples& v,
                              const CondatVuControl& control);

double fixed_point_residual(const Samples& prev_i, const Samples& prev_v, const Samples& next_i,
                            const Samples& next_v, double weight);

}  // namespace pmono
