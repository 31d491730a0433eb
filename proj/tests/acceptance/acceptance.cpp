// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Oracles here are computed independently of the library code under
// test (closed forms, dense eigen-decompositions, a second method).

#include "pmono/netlist.hpp"
#include "pmono/solver.hpp"
#include "pmono/structure.hpp"
#include "pmono/time_march.hpp"

#include "property_checks.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace pmono;

namespace {

const std::string kFixtures = PMONO_FIXTURES;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

Partition rectifier_partition() {
    Partition p;
    p.excitations = {{"p", Excitation::Voltage}, {"q", Excitation::Current}};
    p.forms = {{"RC0", Form::Impedance}, {"D1", Form::Impedance}, {"D2", Form::Impedance},
               {"D3", Form::Admittance}, {"D4", Form::Admittance}};
    return p;
}

const Grid kGrid(200, 1e-4);

Problem rectifier_problem() {
    return compile(load_netlist(kFixtures + "/rectifier.net"), rectifier_partition(), kGrid,
                   std::map<std::string, Waveform>{{"p", Sine{240.0, 50.0, 0.0}}, {"q", Constant{-0.005}}});
}

SolverConfig rectifier_steps() {
    SolverConfig cfg;
    cfg.tau = 0.005;
    cfg.sigma = 0.005;
    return cfg;
}

double relative_l2(const PeriodicSignal& a, const PeriodicSignal& ref) {
    return norm(a - ref) / norm(ref);
}

std::size_t column(const std::vector<std::string>& labels, const std::string& name) {
    return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), name) - labels.begin());
}

double inf_norm(const SignalBundle& b) {
    return b.channels() == 0 ? 0.0 : b.data().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

Verdict hybrid_matrix() {
    Verdict v;
    const auto nl = load_netlist(kFixtures + "/rectifier.net");
    const auto start = Clock::now();
    const auto d = derive_hybrid(nl, rectifier_partition());
    const double elapsed = seconds_since(start);
    const double t = 1.0 / 24;
    Matrix expected(7, 7);
    expected << 0, 0, 0, t, -t, 0, 0,
                0, 0, 0, 0, 0, -1, -1,
                0, 0, 0, 0, 0, -1, -1,
                -t, 0, 0, 0, 0, 0, 1,
                t, 0, 0, 0, 0, 1, 0,
                0, 1, 1, 0, -1, 0, 0,
                0, 1, 1, -1, 0, 0, 0;
    const double err = (d.H.matrix() - expected).cwiseAbs().maxCoeff();
    v.detail << "max entry error " << err << ", " << elapsed * 1e3 << " ms";
    v.require(err <= 1e-12, "entries within 1e-12");
    v.require(elapsed < 0.1, "runtime under 0.1 s");
    return v;
}

Verdict interconnection_blocks() {
    Verdict v;
    const auto ic = derive_hybrid(load_netlist(kFixtures + "/rectifier.net"), rectifier_partition()).ic;
    Matrix M(2, 3), BR(3, 2), BG(2, 2);
    M << 1, 0, -1, 1, -1, 0;
    BR << 0, 0, -1.0 / 24, 0, 1.0 / 24, 0;
    BG << 0, 1, 0, 1;
    v.require(ic.M == M, "M exact");
    v.require(ic.B_R == BR, "B_R exact");
    v.require(ic.B_G == BG, "B_G exact");
    v.require(ic.D == Matrix::Zero(2, 2), "D zero");
    v.detail << "M, B_R, B_G, D compared exactly";
    return v;
}

Verdict rectifier_solve() {
    Verdict v;
    const auto problem = rectifier_problem();
    const auto start = Clock::now();
    const auto r = condat_vu_solve(problem, rectifier_steps());
    const double elapsed = seconds_since(start);
    v.detail << r.iterations << " iterations, residual " << r.residual_history.back().residual << ", "
             << elapsed << " s";
    v.require(r.converged, "converged within 500000 iterations");
    v.require(elapsed < 30.0, "runtime under 30 s");

    const auto vq = r.y.channel(column(problem.y_labels, "v_q"));
    const auto [lo, hi] = std::minmax_element(vq.values().begin(), vq.values().end());
    v.detail << "; v_q in [" << *lo << ", " << *hi << "]";
    v.require(*lo >= -1e-6, "blocking: v_q >= -1e-6");
    v.require(*hi <= 10.0 + 1e-3, "peak bounded by 10 V");
    v.require(*hi - *lo > 0.0 && *hi - *lo < 10.0, "ripple in (0, 10) V");

    // z~ holds the dual port variables the wires impose at (u, z).
    const auto& ic = problem.ic;
    const Samples& u = problem.u.data();
    const Samples zi = ic.B_R * u - ic.M.transpose() * r.v.data();
    const Samples zv = ic.B_G * u + ic.M * r.i.data();
    const auto z = stack(r.i, r.v);
    const auto z_dual = stack(SignalBundle(kGrid, zi, problem.i_labels), SignalBundle(kGrid, zv, problem.v_labels));
    const auto worst_ratio = [&](const SignalBundle& dual) {
        const auto balance = power_balance(problem.u, r.y, z, dual);
        const double scale = inf_norm(problem.u) * inf_norm(r.y) + inf_norm(z) * inf_norm(dual);
        double worst = 0.0;
        for (const double x : balance.values()) worst = std::max(worst, std::abs(x));
        return worst / scale;
    };
    const double wires = worst_ratio(z_dual);
    v.detail << "; power balance " << wires << " of scale";
    v.require(wires <= 1e-8, "power balance within 1e-8");

    // Reported, not gated: pairing z with the law-side values of the last
    // resolvent step measures the remaining inclusion defect instead.
    v.detail << " (law side " << worst_ratio(stack(r.r_values, r.g_values)) << ")";
    return v;
}

Problem one_port(const std::string& file) {
    const auto nl = load_netlist(kFixtures + "/" + file);
    return compile(nl, partition_search(nl), kGrid, std::map<std::string, Waveform>{{"P", Sine{1.0, 50.0, 0.0}}});
}

// Port current of a voltage-driven one-port with discrete impedance Z(lambda),
// lambda the eigenvalue of the periodic backward difference at 50 Hz. The
// port current flows out of the box, hence the minus sign.
PeriodicSignal phasor_current(const std::function<std::complex<double>(std::complex<double>)>& Z) {
    const double w = 2.0 * std::numbers::pi * 50.0;
    const double dt = kGrid.dt();
    const std::complex<double> lambda = (1.0 - std::exp(std::complex<double>(0.0, -w * dt))) / dt;
    const std::complex<double> gain = -1.0 / Z(lambda);
    std::vector<double> out(kGrid.samples());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = (gain * std::exp(std::complex<double>(0.0, w * kGrid.time(k)))).imag();
    }
    return PeriodicSignal(kGrid, std::move(out));
}

Verdict linear_oracles() {
    Verdict v;
    struct Case {
        std::string file;
        std::function<std::complex<double>(std::complex<double>)> Z;
    };
    const std::vector<Case> cases{
        {"resistor.net", [](std::complex<double>) { return std::complex<double>(100.0); }},
        {"rc_oneport.net", [](std::complex<double> l) { return 100.0 + 1.0 / (l * 10e-6); }},
    };
    for (const auto& c : cases) {
        const auto problem = one_port(c.file);
        // The residual is absolute below unit signal norm, and these one-ports
        // carry milliamps, so the comparison needs a tighter tolerance.
        SolverConfig cfg;
        cfg.tol = 1e-10;
        const auto periodic = condat_vu_solve(problem, cfg);
        v.require(periodic.converged, c.file + " periodic converged");
        const std::size_t col = column(problem.y_labels, "i_P");
        const auto ip = periodic.y.channel(col);
        const double phasor_err = relative_l2(ip, phasor_current(c.Z));
        const auto march = backward_euler_march(problem);
        const double march_err = relative_l2(march.y.channel(col), ip);
        v.detail << c.file << ": phasor " << phasor_err << ", march " << march_err << "; ";
        v.require(phasor_err <= 1e-3, c.file + " phasor within 0.1%");
        v.require(march_err <= 5e-3, c.file + " march within 0.5%");
    }
    return v;
}

Verdict smoothed_cross_method() {
    Verdict v;
    const auto problem = smooth_diodes(rectifier_problem(), 1e-6);
    const std::size_t col = column(problem.y_labels, "v_q");
    const auto periodic = condat_vu_solve(problem);
    v.require(periodic.converged, "periodic converged");
    const auto start = Clock::now();
    const auto march = backward_euler_march(problem);
    const double elapsed = seconds_since(start);
    const double err = relative_l2(march.y.channel(col), periodic.y.channel(col));
    v.detail << "v_q relative L2 " << err << " (default steps, march " << elapsed << " s)";
    v.require(err <= 0.02, "agreement within 2%");

    // Reported, not gated: at the larger fixed steps the same 1e-6 residual
    // leaves a visibly larger error.
    const auto coarse = condat_vu_solve(problem, rectifier_steps());
    v.detail << "; at tau = sigma = 0.005: " << relative_l2(march.y.channel(col), coarse.y.channel(col));
    return v;
}

Verdict operator_norm_check() {
    Verdict v;
    const auto problem = rectifier_problem();
    const Matrix& M = problem.ic.M;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(M * M.transpose());
    const double oracle = std::sqrt(eig.eigenvalues().maxCoeff());
    const double lib = operator_norm(M);
    const auto [tau, sigma] = default_step_sizes(M);
    const double product = tau * sigma * lib * lib;
    v.detail << "||M|| = " << lib << ", eigen oracle " << oracle << ", tau sigma ||M||^2 = " << product;
    v.require(std::abs(oracle - std::sqrt(3.0)) <= 1e-10, "oracle equals sqrt 3");
    v.require(std::abs(lib - std::sqrt(3.0)) <= 1e-10, "operator_norm equals sqrt 3");
    v.require(std::abs(product - 0.9801) <= 1e-12, "default steps give 0.9801");
    return v;
}

Verdict property_suites() {
    Verdict v;
    for (const auto& rep : props::all_reports()) {
        v.detail << "\n    " << rep.name << ": " << rep.cases << " cases, " << rep.failures
                 << " failures, worst " << rep.worst;
        v.require(rep.cases >= props::kCases, rep.name + " case count");
        v.require(rep.failures == 0, rep.name);
    }
    return v;
}

Verdict fejer_monotone() {
    Verdict v;
    const auto problem = rectifier_problem();
    auto cfg = rectifier_steps();
    const auto first = condat_vu_solve(problem, cfg);
    v.require(first.converged, "reference run converged");
    const Samples i_star = first.i.data();
    const Samples v_star = first.v.data();
    const Matrix M = problem.ic.M;
    const double dt = problem.grid.dt();
    const double tau = *cfg.tau, sigma = *cfg.sigma;

    std::vector<double> q;
    cfg.on_checkpoint = [&](const Checkpoint& c) {
        const Samples a = c.i - i_star;
        const Samples b = c.v - v_star;
        const double aa = a.squaredNorm() * dt;
        const double bb = b.squaredNorm() * dt;
        const double mab = (M * a).cwiseProduct(b).sum() * dt;
        q.push_back(aa / tau - 2.0 * mab + bb / sigma);
    };
    const auto second = condat_vu_solve(problem, cfg);
    v.require(second.iterations == first.iterations, "replay matches the reference run");

    std::size_t violations = 0;
    double worst = 0.0;
    const double slack = 1e-8 * (q.empty() ? 0.0 : q.front());
    for (std::size_t k = 1; k < q.size(); ++k) {
        const double rise = q[k] - q[k - 1];
        worst = std::max(worst, rise);
        if (rise > slack) ++violations;
    }
    v.detail << q.size() << " checkpoints, Q from " << (q.empty() ? 0.0 : q.front()) << " to "
             << (q.empty() ? 0.0 : q.back()) << ", largest rise " << worst;
    v.require(q.size() == first.residual_history.size(), "one Q per checkpoint");
    v.require(violations == 0, "Q nonincreasing");
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Verdict (*run)();
    };
    const Criterion criteria[] = {
        {"rectifier hybrid matrix", hybrid_matrix},
        {"rectifier interconnection blocks", interconnection_blocks},
        {"rectifier periodic solve", rectifier_solve},
        {"linear one-ports against phasor and time march", linear_oracles},
        {"smoothed rectifier against time march", smoothed_cross_method},
        {"operator norm and default steps", operator_norm_check},
        {"randomized property suites", property_suites},
        {"Fejer monotonicity of the iteration", fejer_monotone},
    };
    int failures = 0;
    int n = 0;
    for (const auto& c : criteria) {
        ++n;
        bool pass = false;
        std::string detail;
        try {
            const Verdict v = c.run();
            pass = v.pass;
            detail = v.detail.str();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!pass) ++failures;
        std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", n, c.name, detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
