#pragma once
// Randomized property checks shared by the property tests and the acceptance
// binary. Each check draws its own cases from a fixed seed and reports the
// number of violations and the worst normalized defect.

#include "pmono/elements.hpp"
#include "pmono/signal.hpp"
#include "pmono/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace pmono::props {

struct Report {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    double worst = 0.0;  // largest defect relative to its tolerance scale

    void record(double defect, double allowed) {
        ++cases;
        worst = std::max(worst, defect);
        if (defect > allowed) ++failures;
    }
};

inline constexpr std::size_t kCases = 1000;
inline constexpr std::uint64_t kSeed = 20240611;

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    Grid grid() { return Grid(index(2, 64), log_uniform(1e-5, 1.0)); }

    PeriodicSignal signal(const Grid& g, double scale = 1.0) {
        std::vector<double> v(g.samples());
        for (auto& x : v) x = scale * uniform(-1.0, 1.0);
        return PeriodicSignal(g, std::move(v));
    }

    Matrix matrix(std::size_t rows, std::size_t cols) {
        Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            for (Eigen::Index c = 0; c < M.cols(); ++c) {
                // Sparse, integer-heavy entries like those of a circuit structure.
                const double pick = uniform(0.0, 1.0);
                M(r, c) = pick < 0.4 ? 0.0 : pick < 0.7 ? (pick < 0.55 ? 1.0 : -1.0) : uniform(-3.0, 3.0);
            }
        }
        return M;
    }

    /// Monotone curve with occasional vertical and horizontal segments.
    PwlResistor pwl() {
        const std::size_t n = index(2, 6);
        std::vector<PwlPoint> pts;
        double x = uniform(-2.0, 0.0), y = uniform(-2.0, 0.0);
        pts.push_back({x, y});
        for (std::size_t k = 1; k < n; ++k) {
            const double pick = uniform(0.0, 1.0);
            const double dx = pick < 0.2 ? 0.0 : uniform(0.01, 1.0);
            const double dy = pick >= 0.2 && pick < 0.4 ? 0.0 : uniform(0.01, 1.0);
            x += dx;
            y += dy;
            pts.push_back({x, y});
        }
        return PwlResistor(std::move(pts));
    }

    ElementLaw law() {
        switch (index(0, 7)) {
            case 0: return DiodeImpedance{};
            case 1: return DiodeAdmittance{};
            case 2: return ResistorImpedance{log_uniform(1e-3, 1e3)};
            case 3: return ResistorAdmittance{log_uniform(1e-3, 1e3)};
            case 4: return CapacitorAdmittance{log_uniform(1e-7, 1e-1)};
            case 5: return InductorImpedance{log_uniform(1e-6, 1.0)};
            case 6: return ParallelRCImpedance{log_uniform(1.0, 1e4), log_uniform(1e-7, 1e-3)};
            default: return pwl();
        }
    }

private:
    std::mt19937_64 rng_;
};

/// ||Jx - Jy||^2 <= <Jx - Jy, x - y> for every resolvent and step in (0, 10].
inline Report resolvent_firm_nonexpansive(std::size_t cases = kCases) {
    Report rep{"resolvent firm nonexpansiveness"};
    Draw d(kSeed);
    while (rep.cases < cases) {
        const Grid g = d.grid();
        const auto law = d.law();
        const double alpha = d.uniform(1e-6, 10.0);
        const PreparedResolvent J(law, alpha, g.dt(), g.samples());
        const auto x = d.signal(g, d.log_uniform(1e-2, 1e2));
        const auto y = d.signal(g, d.log_uniform(1e-2, 1e2));
        const auto jx = J.apply(x);
        const auto jy = J.apply(y);
        const auto dj = jx - jy;
        const double lhs = inner_product(dj, dj);
        const double rhs = inner_product(dj, x - y);
        const double scale = inner_product(x - y, x - y) + 1e-300;
        rep.record((lhs - rhs) / scale, 1e-9);
    }
    return rep;
}

/// <Ax - Ay, x - y> >= 0 wherever the law is single-valued.
inline Report law_monotone(std::size_t cases = kCases) {
    Report rep{"monotonicity of single-valued laws"};
    Draw d(kSeed + 1);
    std::size_t attempts = 0;
    while (rep.cases < cases && attempts < 100 * cases) {
        ++attempts;
        const Grid g = d.grid();
        const auto law = d.law();
        const auto x = d.signal(g, d.log_uniform(1e-2, 1e2));
        const auto y = d.signal(g, d.log_uniform(1e-2, 1e2));
        const auto ax = forward_eval(law, x);
        const auto ay = forward_eval(law, y);
        if (!ax || !ay) continue;
        const auto da = *ax - *ay;
        const double pairing = inner_product(da, x - y);
        const double scale = norm(da) * norm(x - y) + 1e-300;
        rep.record(-pairing / scale, 1e-10);
    }
    return rep;
}

/// The resolvent output x of s satisfies (s - x) / alpha = A x.
inline Report resolvent_inverts(std::size_t cases = kCases) {
    Report rep{"resolvent inverts Id + alpha A"};
    Draw d(kSeed + 2);
    std::size_t attempts = 0;
    while (rep.cases < cases && attempts < 100 * cases) {
        ++attempts;
        const Grid g = d.grid();
        const auto law = d.law();
        const double alpha = d.uniform(1e-3, 10.0);
        const auto s = d.signal(g, d.log_uniform(1e-2, 1e2));
        const PreparedResolvent J(law, alpha, g.dt(), g.samples());
        const auto x = J.apply(s);
        const auto ax = forward_eval(law, x);
        if (!ax) continue;
        const auto defect = s - x - alpha * *ax;
        rep.record(norm(defect) / (norm(s) + 1e-300), 1e-9);
    }
    return rep;
}

/// <z, S z> = 0 for the skew block of any M.
inline Report skew_pairing(std::size_t cases = kCases) {
    Report rep{"skewness of the interconnection"};
    Draw d(kSeed + 3);
    while (rep.cases < cases) {
        const Grid g = d.grid();
        const std::size_t m = d.index(0, 4), p = d.index(0, 6), q = d.index(0, 6);
        Interconnection ic = Interconnection::zeros(m, p, q);
        ic.M = d.matrix(q, p);
        const Matrix S = skew_block(ic);
        Samples z(static_cast<Eigen::Index>(p + q), static_cast<Eigen::Index>(g.samples()));
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = d.uniform(-1.0, 1.0);
        }
        const Samples sz = S * z;
        const double pairing = (z.array() * sz.array()).sum() * g.dt();
        const double scale = std::sqrt((z.array().square()).sum() * g.dt()) *
                                 std::sqrt((sz.array().square()).sum() * g.dt()) +
                             1e-300;
        rep.record(std::abs(pairing) / scale, 1e-13);
    }
    return rep;
}

/// <nabla u, u> >= 0: the backward difference is monotone on periodic signals.
inline Report difference_monotone(std::size_t cases = kCases) {
    Report rep{"monotonicity of the backward difference"};
    Draw d(kSeed + 4);
    while (rep.cases < cases) {
        const Grid g = d.grid();
        const auto u = d.signal(g, d.log_uniform(1e-3, 1e3));
        const double pairing = inner_product(backward_difference(u), u);
        // Exact value: sum (u_k - u_{k-1})^2 / 2.
        const double uu = inner_product(u, u) / g.dt();
        rep.record(-pairing / (uu + 1e-300), 1e-12);
    }
    return rep;
}

/// <M i, v> = <i, M^T v> through the bundle operators.
inline Report adjoint_identity(std::size_t cases = kCases) {
    Report rep{"adjoint identity of M"};
    Draw d(kSeed + 5);
    while (rep.cases < cases) {
        const Grid g = d.grid();
        const std::size_t p = d.index(1, 6), q = d.index(1, 6);
        Interconnection ic = Interconnection::zeros(1, p, q);
        ic.M = d.matrix(q, p);
        std::vector<PeriodicSignal> ic_ch, vc_ch;
        std::vector<std::string> il, vl;
        for (std::size_t k = 0; k < p; ++k) {
            ic_ch.push_back(d.signal(g));
            il.push_back("i" + std::to_string(k));
        }
        for (std::size_t k = 0; k < q; ++k) {
            vc_ch.push_back(d.signal(g));
            vl.push_back("v" + std::to_string(k));
        }
        const auto i = SignalBundle::from_channels(g, ic_ch, il);
        const auto v = SignalBundle::from_channels(g, vc_ch, vl);
        const double lhs = inner_product(apply_M(ic, i), v);
        const double rhs = inner_product(i, apply_Mt(ic, v));
        const double scale = (operator_norm(ic.M) + 1.0) * norm(i) * norm(v) + 1e-300;
        rep.record(std::abs(lhs - rhs) / scale, 1e-13);
    }
    return rep;
}

/// <u, y> = <y, u>.
inline Report inner_product_symmetric(std::size_t cases = kCases) {
    Report rep{"symmetry of the inner product"};
    Draw d(kSeed + 6);
    while (rep.cases < cases) {
        const Grid g = d.grid();
        const auto u = d.signal(g, d.log_uniform(1e-3, 1e3));
        const auto y = d.signal(g, d.log_uniform(1e-3, 1e3));
        const double a = inner_product(u, y);
        const double b = inner_product(y, u);
        rep.record(std::abs(a - b) / (norm(u) * norm(y) + 1e-300), 1e-15);
    }
    return rep;
}

/// nabla(a u + b w) = a nabla u + b nabla w.
inline Report difference_linear(std::size_t cases = kCases) {
    Report rep{"linearity of the backward difference"};
    Draw d(kSeed + 7);
    while (rep.cases < cases) {
        const Grid g = d.grid();
        const auto u = d.signal(g);
        const auto w = d.signal(g);
        const double a = d.uniform(-5.0, 5.0), b = d.uniform(-5.0, 5.0);
        const auto lhs = backward_difference(a * u + b * w);
        const auto rhs = a * backward_difference(u) + b * backward_difference(w);
        const double scale = (std::abs(a) + std::abs(b)) * (norm(u) + norm(w)) / g.dt() + 1e-300;
        rep.record(norm(lhs - rhs) / scale, 1e-14);
    }
    return rep;
}

/// ||M^T|| = ||M||.
inline Report transpose_norm(std::size_t cases = kCases) {
    Report rep{"operator norm of the transpose"};
    Draw d(kSeed + 8);
    while (rep.cases < cases) {
        const Matrix M = d.matrix(d.index(1, 7), d.index(1, 7));
        const double a = operator_norm(M);
        const double b = operator_norm(M.transpose());
        rep.record(std::abs(a - b) / (std::max(a, b) + 1e-300), 1e-10);
    }
    return rep;
}

/// Applying M to a bundle equals applying it sample by sample, which equals
/// the Kronecker product (M x I_N) acting on the channel-major stacking.
inline Report kronecker_equivalence(std::size_t cases = kCases) {
    Report rep{"samplewise and Kronecker action agree"};
    Draw d(kSeed + 9);
    while (rep.cases < cases) {
        const Grid g(d.index(2, 16), d.log_uniform(1e-5, 1.0));
        const std::size_t p = d.index(1, 5), q = d.index(1, 5);
        const auto N = static_cast<Eigen::Index>(g.samples());
        Interconnection ic = Interconnection::zeros(1, p, q);
        ic.M = d.matrix(q, p);
        Samples z(static_cast<Eigen::Index>(p), N);
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            for (Eigen::Index c = 0; c < N; ++c) z(r, c) = d.uniform(-1.0, 1.0);
        }
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < p; ++k) labels.push_back("i" + std::to_string(k));
        const auto out = apply_M(ic, SignalBundle(g, z, labels));

        Matrix kron = Matrix::Zero(static_cast<Eigen::Index>(q) * N, static_cast<Eigen::Index>(p) * N);
        for (Eigen::Index r = 0; r < ic.M.rows(); ++r) {
            for (Eigen::Index c = 0; c < ic.M.cols(); ++c) {
                for (Eigen::Index k = 0; k < N; ++k) kron(r * N + k, c * N + k) = ic.M(r, c);
            }
        }
        Eigen::VectorXd stacked(static_cast<Eigen::Index>(p) * N);
        for (Eigen::Index r = 0; r < z.rows(); ++r) stacked.segment(r * N, N) = z.row(r).transpose();
        const Eigen::VectorXd expect = kron * stacked;

        double worst = 0.0;
        for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(q); ++r) {
            for (Eigen::Index k = 0; k < N; ++k) {
                const double sample = ic.M.row(r).dot(z.col(k));
                worst = std::max(worst, std::abs(out.data()(r, k) - sample));
                worst = std::max(worst, std::abs(out.data()(r, k) - expect(r * N + k)));
            }
        }
        rep.record(worst / (ic.M.cwiseAbs().sum() + 1.0), 1e-14);
    }
    return rep;
}

inline std::vector<Report> all_reports() {
    return {resolvent_firm_nonexpansive(), law_monotone(),     resolvent_inverts(),
            skew_pairing(),                difference_monotone(), adjoint_identity(),
            inner_product_symmetric(),     difference_linear(), transpose_norm(),
            kronecker_equivalence()};
}

}  // namespace pmono::props
