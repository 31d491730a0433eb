#include "pmono/solver.hpp"

#include "pmono/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pmono {

namespace {

double weighted_norm(const Samples& a, double weight) {
    return std::sqrt(a.squaredNorm() * weight);
}

void require_grid(const SignalBundle& b, const Grid& grid, const char* what) {
    if (!(b.grid() == grid)) throw DimensionError(std::string(what) + " is on a different grid");
}

}  // namespace

void validate_problem(const Problem& problem) {
    require_valid(problem.ic);
    const auto& ic = problem.ic;
    if (problem.r_block.form() != Form::Impedance || problem.g_block.form() != Form::Admittance) {
        throw ConfigError("problem blocks must be (impedance, admittance)");
    }
    if (problem.r_block.size() != ic.p) {
        throw DimensionError("impedance block has " + std::to_string(problem.r_block.size()) +
                             " laws, structure expects p = " + std::to_string(ic.p));
    }
    if (problem.g_block.size() != ic.q) {
        throw DimensionError("admittance block has " + std::to_string(problem.g_block.size()) +
                             " laws, structure expects q = " + std::to_string(ic.q));
    }
    if (problem.u.channels() != ic.m) {
        throw DimensionError("excitation bundle has " + std::to_string(problem.u.channels()) +
                             " channels, structure expects m = " + std::to_string(ic.m));
    }
    require_grid(problem.u, problem.grid, "excitation bundle");
    if (!problem.u.data().allFinite()) throw ConfigError("excitations must be finite");
    if (problem.i_labels.size() != ic.p || problem.v_labels.size() != ic.q ||
        problem.y_labels.size() != ic.m) {
        throw DimensionError("problem labels do not match (p, q, m)");
    }
}

std::pair<double, double> default_step_sizes(const Matrix& M) {
    const double norm = operator_norm(M);
    if (norm == 0.0) return {1.0, 1.0};
    return {0.99 / norm, 0.99 / norm};
}

double fixed_point_residual(const Samples& prev_i, const Samples& prev_v, const Samples& next_i,
                            const Samples& next_v, double weight) {
    if (prev_i.rows() != next_i.rows() || prev_i.cols() != next_i.cols() ||
        prev_v.rows() != next_v.rows() || prev_v.cols() != next_v.cols()) {
        throw DimensionError("fixed_point_residual: iterate shapes differ");
    }
    const double change = weighted_norm(next_i - prev_i, weight) +
                          weighted_norm(next_v - prev_v, weight);
    const double size = weighted_norm(next_i, weight) + weighted_norm(next_v, weight);
    return change / std::max(1.0, size);
}

double fixed_point_residual(const SignalBundle& prev_i, const SignalBundle& prev_v,
                            const SignalBundle& next_i, const SignalBundle& next_v) {
    const Grid& grid = next_i.grid();
    if (!(prev_i.grid() == grid) || !(prev_v.grid() == grid) || !(next_v.grid() == grid)) {
        throw DimensionError("fixed_point_residual: iterates live on different grids");
    }
    return fixed_point_residual(prev_i.data(), prev_v.data(), next_i.data(), next_v.data(),
                                grid.dt());
}

std::optional<double> inclusion_residual(const Problem& problem, const SignalBundle& i,
                                         const SignalBundle& v) {
    const auto& ic = problem.ic;
    const auto r = forward_eval(problem.r_block, i);
    if (!r) return std::nullopt;
    const auto g = forward_eval(problem.g_block, v);
    if (!g) return std::nullopt;
    Samples top = r->data() - ic.B_R * problem.u.data();
    top.noalias() += ic.M.transpose() * v.data();
    Samples bottom = g->data() - ic.B_G * problem.u.data();
    bottom.noalias() -= ic.M * i.data();
    const double dt = problem.grid.dt();
    return std::sqrt((top.squaredNorm() + bottom.squaredNorm()) * dt);
}

CondatVuOutcome run_condat_vu(const CondatVuSetup& setup, Samples& i, Samples& v,
                              const CondatVuControl& control) {
    if (control.check_every == 0) throw ConfigError("check_every must be positive");
    if (!(control.tol > 0.0)) throw ConfigError("tolerance must be positive");
    const Eigen::Index cols = i.cols();
    const Matrix Mt = setup.M.transpose();
    const Samples r_shift = setup.tau * setup.r_offset;
    const Samples g_shift = setup.sigma * setup.g_offset;

    Samples i_in(i.rows(), cols), i_next(i.rows(), cols), extrap(i.rows(), cols);
    Samples v_in(v.rows(), cols), v_next(v.rows(), cols);

    CondatVuOutcome out;
    for (std::size_t k = 1; k <= control.max_iters; ++k) {
        i_in = i + r_shift;
        i_in.noalias() -= setup.tau * (Mt * v);
        setup.r.apply(i_in, i_next);

        extrap = 2.0 * i_next - i;
        v_in = v + g_shift;
        v_in.noalias() += setup.sigma * (setup.M * extrap);
        setup.g.apply(v_in, v_next);

        out.iterations = k;
        const bool check = k % control.check_every == 0 || k == control.max_iters;
        if (check) {
            if (!i_next.allFinite() || !v_next.allFinite()) {
                throw DivergenceError(k, "iterate became non-finite at iteration " +
                                             std::to_string(k));
            }
            const double residual =
                fixed_point_residual(i, v, i_next, v_next, setup.weight);
            out.history.push_back({k, residual});
            if (control.residual_log) {
                *control.residual_log << k << ',' << std::setprecision(17) << residual << '\n';
            }
            i.swap(i_next);
            v.swap(v_next);
            if (control.on_checkpoint && *control.on_checkpoint) {
                (*control.on_checkpoint)(Checkpoint{k, residual, i, v});
            }
            if (residual <= control.tol) {
                out.converged = true;
                break;
            }
        } else {
            i.swap(i_next);
            v.swap(v_next);
        }
    }

    // i_in lies in i + tau (R(i) - B_R u), so (i_in - i)/tau + B_R u is in R(i).
    if (out.iterations > 0) {
        out.r_values = (i_in - i) / setup.tau + setup.r_offset;
        out.g_values = (v_in - v) / setup.sigma + setup.g_offset;
    } else {
        out.r_values = Samples::Zero(i.rows(), cols);
        out.g_values = Samples::Zero(v.rows(), cols);
    }
    return out;
}

SolverResult condat_vu_solve(const Problem& problem, const SolverConfig& config) {
    SignalBundle i0(problem.grid, problem.i_labels);
    SignalBundle v0(problem.grid, problem.v_labels);
    return condat_vu_solve(problem, config, std::move(i0), std::move(v0));
}

SolverResult condat_vu_solve(const Problem& problem, const SolverConfig& config, SignalBundle i0,
                             SignalBundle v0) {
    validate_problem(problem);
    const auto& ic = problem.ic;
    if (i0.channels() != ic.p || v0.channels() != ic.q) {
        throw DimensionError("initial iterates do not match (p, q)");
    }
    require_grid(i0, problem.grid, "initial current iterate");
    require_grid(v0, problem.grid, "initial voltage iterate");

    const auto defaults = default_step_sizes(ic.M);
    const double tau = config.tau.value_or(defaults.first);
    const double sigma = config.sigma.value_or(defaults.second);
    if (!(tau > 0.0) || !(sigma > 0.0)) throw ConfigError("step sizes must be positive");
    if (config.max_iters == 0) throw ConfigError("max_iters must be positive");

    std::vector<std::string> warnings;
    const double norm = operator_norm(ic.M);
    const double product = tau * sigma * norm * norm;
    if (product >= 1.0) {
        std::ostringstream os;
        os << "step condition violated: tau*sigma*||M||^2 = " << std::setprecision(6) << product
           << " >= 1 (tau=" << tau << ", sigma=" << sigma << ", ||M||=" << norm << ")";
        if (!config.force_steps) throw ConfigError(os.str() + "; pass force to run anyway");
        warnings.push_back(os.str());
    }

    const auto& grid = problem.grid;
    const auto r = problem.r_block.prepare(tau, grid.dt(), grid.samples());
    const auto g = problem.g_block.prepare(sigma, grid.dt(), grid.samples());
    CondatVuSetup setup{r,     g,     ic.M,     ic.B_R * problem.u.data(), ic.B_G * problem.u.data(),
                        tau, sigma, grid.dt()};
    CondatVuControl control;
    control.max_iters = config.max_iters;
    control.tol = config.tol;
    control.check_every = config.check_every;
    control.on_checkpoint = &config.on_checkpoint;
    control.residual_log = config.residual_log;

    Samples i = i0.data();
    Samples v = v0.data();
    auto outcome = run_condat_vu(setup, i, v, control);

    SignalBundle i_out(grid, std::move(i), problem.i_labels);
    SignalBundle v_out(grid, std::move(v), problem.v_labels);
    SignalBundle y = apply_output(ic, i_out, v_out, problem.u);
    y = SignalBundle(grid, y.data(), problem.y_labels);
    SignalBundle r_values(grid, std::move(outcome.r_values), problem.i_labels);
    SignalBundle g_values(grid, std::move(outcome.g_values), problem.v_labels);

    return SolverResult{std::move(i_out),
                        std::move(v_out),
                        std::move(y),
                        std::move(r_values),
                        std::move(g_values),
                        outcome.iterations,
                        outcome.converged,
                        std::move(outcome.history),
                        std::move(warnings),
                        tau,
                        sigma};
}

}  // namespace pmono
