#pragma once

// =============================================================================
// Skew-symmetric interconnection structure
// =============================================================================
// The wires-and-transformers box is described by a skew-symmetric hybrid
// matrix H mapping (u; z) to (y; z~). Under an (i, v) split of z its lower
// right block is [[0, -M^T], [M, 0]], and the circuit behavior becomes
//
//     (R(i); G(v)) + [[0, M^T], [-M, 0]] (i; v) - (B_R; B_G) u = 0
//     y = -(B_R^T i + B_G^T v) + D u
//
// with every matrix acting samplewise (Kronecker product with Id).
// =============================================================================

#include "pmono/signal.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace pmono {

using Matrix = Eigen::MatrixXd;

struct Interconnection {
    std::size_t m = 0;  // external ports
    std::size_t p = 0;  // impedance-form elements
    std::size_t q = 0;  // admittance-form elements
    Matrix M;    // q x p
    Matrix B_R;  // p x m
    Matrix B_G;  // q x m
    Matrix D;    // m x m

    static Interconnection zeros(std::size_t m, std::size_t p, std::size_t q);
};

/// Dimension and finiteness problems, empty when the structure is usable.
std::vector<std::string> validate_interconnection(const Interconnection& ic);

/// Throws DimensionError listing all violations.
void require_valid(const Interconnection& ic);

class HybridMatrix {
public:
    HybridMatrix(Matrix H, std::size_t m, std::size_t p, std::size_t q);

    [[nodiscard]] const Matrix& matrix() const noexcept { return H_; }
    [[nodiscard]] std::size_t m() const noexcept { return m_; }
    [[nodiscard]] std::size_t p() const noexcept { return p_; }
    [[nodiscard]] std::size_t q() const noexcept { return q_; }

    [[nodiscard]] Matrix h11() const { return H_.topLeftCorner(m_, m_); }
    [[nodiscard]] Matrix h12() const { return H_.topRightCorner(m_, p_ + q_); }
    [[nodiscard]] Matrix h21() const { return H_.bottomLeftCorner(p_ + q_, m_); }
    [[nodiscard]] Matrix h22() const { return H_.bottomRightCorner(p_ + q_, p_ + q_); }

    /// max |H + H^T|.
    [[nodiscard]] double skewness_defect() const;

    /// Largest entry of the diagonal (i,i) and (v,v) sub-blocks of H22.
    [[nodiscard]] double block_defect() const;

    /// Reads M, B_R, B_G and D off the blocks.
    [[nodiscard]] Interconnection interconnection() const;

private:
    Matrix H_;
    std::size_t m_, p_, q_;
};

SignalBundle apply_M(const Interconnection& ic, const SignalBundle& i);
SignalBundle apply_Mt(const Interconnection& ic, const SignalBundle& v);

/// y = -(B_R^T i + B_G^T v) + D u, samplewise.
SignalBundle apply_output(const Interconnection& ic, const SignalBundle& i, const SignalBundle& v,
                          const SignalBundle& u);

/// Spectral norm. Exact SVD when min(rows, cols) <= 3, otherwise power
/// iteration on M^T M from a vector of ones.
double operator_norm(const Matrix& M);

/// The (p+q) x (p+q) skew block [[0, M^T], [-M, 0]].
Matrix skew_block(const Interconnection& ic);

/// Per-sample u(k)^T y(k) + z(k)^T z~(k).
PeriodicSignal power_balance(const SignalBundle& u, const SignalBundle& y, const SignalBundle& z,
                             const SignalBundle& z_dual);

/// Stacks two bundles channel-wise (a first).
SignalBundle stack(const SignalBundle& a, const SignalBundle& b);

}  // namespace pmono
