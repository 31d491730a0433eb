#include "catch_amalgamated.hpp"

#include "pmono/error.hpp"
#include "pmono/structure.hpp"

#include <cmath>
#include <limits>

using namespace pmono;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Interconnection rectifier() {
    Interconnection ic = Interconnection::zeros(2, 3, 2);
    ic.M << 1, 0, -1, 1, -1, 0;
    ic.B_R << 0, 0, -1.0 / 24, 0, 1.0 / 24, 0;
    ic.B_G << 0, 1, 0, 1;
    return ic;
}

SignalBundle constant_bundle(const Grid& g, const std::vector<double>& levels) {
    Samples data(static_cast<Eigen::Index>(levels.size()), static_cast<Eigen::Index>(g.samples()));
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < levels.size(); ++c) {
        data.row(static_cast<Eigen::Index>(c)).setConstant(levels[c]);
        labels.push_back("c" + std::to_string(c));
    }
    return SignalBundle(g, std::move(data), std::move(labels));
}

}  // namespace

TEST_CASE("apply M on the rectifier structure") {
    const Grid g(5, 1e-3);
    const auto ic = rectifier();
    const auto out = apply_M(ic, constant_bundle(g, {1, 0, 0}));
    REQUIRE(out.channels() == 2);
    CHECK(out.channel(0)[3] == 1.0);
    CHECK(out.channel(1)[3] == 1.0);
    const auto back = apply_Mt(ic, constant_bundle(g, {1, 0}));
    CHECK(back.channel(2)[0] == -1.0);
    CHECK_THROWS_AS(apply_M(ic, constant_bundle(g, {1, 0})), DimensionError);

    Interconnection zero = Interconnection::zeros(0, 3, 2);
    const auto z = apply_M(zero, constant_bundle(g, {1, 2, 3}));
    CHECK(z.data().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator norm") {
    const double sqrt3 = std::sqrt(3.0);
    CHECK_THAT(operator_norm(rectifier().M), WithinRel(sqrt3, 1e-14));
    CHECK_THAT(operator_norm(Matrix::Identity(2, 2)), WithinRel(1.0, 1e-15));
    CHECK(operator_norm(Matrix::Zero(3, 4)) == 0.0);
    CHECK(operator_norm(Matrix(0, 3)) == 0.0);

    // Power iteration branch against the closed form of a diagonal matrix.
    Matrix big = Matrix::Zero(5, 6);
    for (int k = 0; k < 5; ++k) big(k, k) = 1.0 + k;
    CHECK_THAT(operator_norm(big), WithinRel(5.0, 1e-10));
}

TEST_CASE("output map follows the worked example") {
    const Grid g(4, 1e-3);
    const auto ic = rectifier();
    const auto zero_i = constant_bundle(g, {0, 0, 0});
    const auto zero_u = constant_bundle(g, {0, 0});

    const auto y1 = apply_output(ic, zero_i, constant_bundle(g, {-1, -2}), zero_u);
    CHECK(y1.channel(1)[0] == 3.0);
    CHECK(y1.channel(0)[0] == 0.0);

    const auto y2 = apply_output(ic, constant_bundle(g, {0, 1, 0}), constant_bundle(g, {0, 0}), zero_u);
    CHECK_THAT(y2.channel(0)[2], WithinRel(1.0 / 24, 1e-15));

    Interconnection pass = Interconnection::zeros(2, 0, 0);
    pass.D = Matrix::Identity(2, 2);
    const auto u = constant_bundle(g, {1.5, -2.5});
    const auto y3 = apply_output(pass, SignalBundle(g, std::vector<std::string>{}),
                                 SignalBundle(g, std::vector<std::string>{}), u);
    CHECK(y3.channel(0)[1] == 1.5);
    CHECK(y3.channel(1)[1] == -2.5);
}

TEST_CASE("validation lists violations") {
    CHECK(validate_interconnection(rectifier()).empty());
    auto bad = rectifier();
    bad.M = Matrix::Zero(3, 2);
    CHECK_FALSE(validate_interconnection(bad).empty());
    auto nan = rectifier();
    nan.B_G(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(validate_interconnection(nan).empty());
    CHECK_THROWS_AS(require_valid(nan), DimensionError);
}

TEST_CASE("hybrid matrix blocks") {
    // 1 port, 1 impedance, 1 admittance.
    Matrix H(3, 3);
    H << 0, 2, -3,
        -2, 0, 5,
         3, -5, 0;
    const HybridMatrix hm(H, 1, 1, 1);
    CHECK(hm.skewness_defect() == 0.0);
    CHECK(hm.block_defect() == 0.0);
    const auto ic = hm.interconnection();
    CHECK(ic.M(0, 0) == -5.0);
    CHECK(ic.B_R(0, 0) == -2.0);
    CHECK(ic.B_G(0, 0) == 3.0);
    CHECK(ic.D(0, 0) == 0.0);
}

TEST_CASE("power balance") {
    const Grid g(6, 1.0);
    const auto z0 = constant_bundle(g, {0, 0});
    const auto u0 = constant_bundle(g, {0});
    const auto zero = power_balance(u0, u0, z0, z0);
    for (const double x : zero.values()) CHECK(x == 0.0);

    const auto ic = rectifier();
    const Matrix S = skew_block(ic);
    Samples z(5, 6);
    for (Eigen::Index r = 0; r < 5; ++r) {
        for (Eigen::Index c = 0; c < 6; ++c) z(r, c) = std::sin(1.0 + 3.0 * r + 0.7 * c);
    }
    const SignalBundle zb(g, z, {"a", "b", "c", "d", "e"});
    const SignalBundle zd(g, Samples(-S * z), {"a", "b", "c", "d", "e"});
    const auto u = constant_bundle(g, {0, 0});
    const auto balance = power_balance(u, u, zb, zd);
    for (const double x : balance.values()) CHECK_THAT(x, WithinAbs(0.0, 1e-12));
}

TEST_CASE("stack concatenates channels") {
    const Grid g(3, 1.0);
    const auto s = stack(constant_bundle(g, {1}), constant_bundle(g, {2, 3}));
    CHECK(s.channels() == 3);
    CHECK(s.channel(2)[0] == 3.0);
}
