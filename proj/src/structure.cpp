#include "pmono/structure.hpp"

#include "pmono/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pmono {

namespace {

std::string shape(const Matrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void check_block(std::vector<std::string>& out, const Matrix& a, std::size_t rows,
                 std::size_t cols, const char* name) {
    if (static_cast<std::size_t>(a.rows()) != rows || static_cast<std::size_t>(a.cols()) != cols) {
        out.push_back(std::string(name) + " is " + shape(a) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
        return;
    }
    if (!a.allFinite()) out.push_back(std::string(name) + " has non-finite entries");
}

void require_channels(const SignalBundle& b, std::size_t n, const char* what) {
    if (b.channels() != n) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(n) +
                             " channels, got " + std::to_string(b.channels()));
    }
}

std::vector<std::string> numbered(const char* prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

}  // namespace

Interconnection Interconnection::zeros(std::size_t m, std::size_t p, std::size_t q) {
    const auto e = [](std::size_t n) { return static_cast<Eigen::Index>(n); };
    return {m, p, q, Matrix::Zero(e(q), e(p)), Matrix::Zero(e(p), e(m)),
            Matrix::Zero(e(q), e(m)), Matrix::Zero(e(m), e(m))};
}

std::vector<std::string> validate_interconnection(const Interconnection& ic) {
    std::vector<std::string> out;
    check_block(out, ic.M, ic.q, ic.p, "M");
    check_block(out, ic.B_R, ic.p, ic.m, "B_R");
    check_block(out, ic.B_G, ic.q, ic.m, "B_G");
    check_block(out, ic.D, ic.m, ic.m, "D");
    return out;
}

void require_valid(const Interconnection& ic) {
    const auto problems = validate_interconnection(ic);
    if (problems.empty()) return;
    std::string msg = "invalid interconnection:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw DimensionError(msg);
}

HybridMatrix::HybridMatrix(Matrix H, std::size_t m, std::size_t p, std::size_t q)
    : H_(std::move(H)), m_(m), p_(p), q_(q) {
    const auto n = static_cast<Eigen::Index>(m + p + q);
    if (H_.rows() != n || H_.cols() != n) {
        throw DimensionError("hybrid matrix is " + shape(H_) + ", expected " +
                             std::to_string(n) + "x" + std::to_string(n));
    }
}

double HybridMatrix::skewness_defect() const {
    if (H_.size() == 0) return 0.0;
    return (H_ + H_.transpose()).cwiseAbs().maxCoeff();
}

double HybridMatrix::block_defect() const {
    const Matrix h = h22();
    double defect = 0.0;
    if (p_ > 0) defect = std::max(defect, h.topLeftCorner(p_, p_).cwiseAbs().maxCoeff());
    if (q_ > 0) defect = std::max(defect, h.bottomRightCorner(q_, q_).cwiseAbs().maxCoeff());
    return defect;
}

Interconnection HybridMatrix::interconnection() const {
    const Matrix b = h21();
    Interconnection ic;
    ic.m = m_;
    ic.p = p_;
    ic.q = q_;
    ic.M = h22().bottomLeftCorner(q_, p_);
    ic.B_R = b.topRows(p_);
    ic.B_G = b.bottomRows(q_);
    ic.D = h11();
    return ic;
}

SignalBundle apply_M(const Interconnection& ic, const SignalBundle& i) {
    require_channels(i, ic.p, "apply_M");
    Samples out = ic.M * i.data();
    return SignalBundle(i.grid(), std::move(out), numbered("Mi", ic.q));
}

SignalBundle apply_Mt(const Interconnection& ic, const SignalBundle& v) {
    require_channels(v, ic.q, "apply_Mt");
    Samples out = ic.M.transpose() * v.data();
    return SignalBundle(v.grid(), std::move(out), numbered("Mtv", ic.p));
}

SignalBundle apply_output(const Interconnection& ic, const SignalBundle& i, const SignalBundle& v,
                          const SignalBundle& u) {
    require_channels(i, ic.p, "apply_output (i)");
    require_channels(v, ic.q, "apply_output (v)");
    require_channels(u, ic.m, "apply_output (u)");
    if (!(i.grid() == u.grid()) || !(v.grid() == u.grid())) {
        throw DimensionError("apply_output: bundles live on different grids");
    }
    Samples y = ic.D * u.data();
    y.noalias() -= ic.B_R.transpose() * i.data();
    y.noalias() -= ic.B_G.transpose() * v.data();
    return SignalBundle(u.grid(), std::move(y), numbered("y", ic.m));
}

double operator_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    if (std::min(M.rows(), M.cols()) <= 3) {
        Eigen::JacobiSVD<Matrix> svd(M);
        return svd.singularValues()(0);
    }
    const Matrix gram = M.transpose() * M;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(gram.cols());
    double estimate = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd next = gram * x;
        const double len = next.norm();
        if (len == 0.0) return 0.0;
        next /= len;
        const double rayleigh = next.dot(gram * next);
        const bool settled = std::abs(rayleigh - estimate) <= 1e-12 * std::abs(rayleigh);
        estimate = rayleigh;
        x = next;
        if (settled) break;
    }
    return std::sqrt(std::max(estimate, 0.0));
}

Matrix skew_block(const Interconnection& ic) {
    const auto p = static_cast<Eigen::Index>(ic.p);
    const auto q = static_cast<Eigen::Index>(ic.q);
    Matrix S = Matrix::Zero(p + q, p + q);
    S.topRightCorner(p, q) = ic.M.transpose();
    S.bottomLeftCorner(q, p) = -ic.M;
    return S;
}

PeriodicSignal power_balance(const SignalBundle& u, const SignalBundle& y, const SignalBundle& z,
                             const SignalBundle& z_dual) {
    if (u.channels() != y.channels() || z.channels() != z_dual.channels()) {
        throw DimensionError("power_balance: paired bundles have different channel counts");
    }
    const Grid& grid = u.grid();
    if (!(y.grid() == grid) || !(z.grid() == grid) || !(z_dual.grid() == grid)) {
        throw DimensionError("power_balance: bundles live on different grids");
    }
    std::vector<double> out(grid.samples(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double acc = 0.0;
        for (std::size_t c = 0; c < u.channels(); ++c) acc += u.row(c)[k] * y.row(c)[k];
        for (std::size_t c = 0; c < z.channels(); ++c) acc += z.row(c)[k] * z_dual.row(c)[k];
        out[k] = acc;
    }
    return PeriodicSignal(grid, std::move(out));
}

SignalBundle stack(const SignalBundle& a, const SignalBundle& b) {
    if (!(a.grid() == b.grid())) throw DimensionError("stack: bundles live on different grids");
    Samples data(a.data().rows() + b.data().rows(), static_cast<Eigen::Index>(a.grid().samples()));
    if (a.channels() > 0) data.topRows(a.data().rows()) = a.data();
    if (b.channels() > 0) data.bottomRows(b.data().rows()) = b.data();
    auto labels = a.labels();
    labels.insert(labels.end(), b.labels().begin(), b.labels().end());
    return SignalBundle(a.grid(), std::move(data), std::move(labels));
}

}  // namespace pmono
