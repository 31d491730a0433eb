#include "catch_amalgamated.hpp"

#include "pmono/error.hpp"
#include "pmono/signal.hpp"

#include <cmath>
#include <numbers>

using namespace pmono;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grid rejects degenerate sizes") {
    CHECK_THROWS_AS(Grid(1, 1e-4), ConfigError);
    CHECK_THROWS_AS(Grid(10, 0.0), ConfigError);
    CHECK_THROWS_AS(Grid(10, -1.0), ConfigError);
    const Grid g(200, 1e-4);
    CHECK_THAT(g.period(), WithinRel(0.02, 1e-15));
}

TEST_CASE("signal values are validated") {
    const Grid g(4, 1.0);
    CHECK_THROWS_AS(PeriodicSignal(g, {1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(PeriodicSignal(g, {1, 2, NAN, 4}), ConfigError);
}

TEST_CASE("inner product of constants is the period") {
    const Grid g(200, 1e-4);
    const auto one = PeriodicSignal::constant(g, 1.0);
    CHECK_THAT(inner_product(one, one), WithinRel(0.02, 1e-12));
}

TEST_CASE("sine and cosine over a full period are orthogonal") {
    const Grid g(200, 1e-4);
    const auto s = make_waveform(Sine{1.0, 50.0, 0.0}, g);
    const auto c = make_waveform(Sine{1.0, 50.0, std::numbers::pi / 2}, g);
    CHECK(std::abs(inner_product(s, c)) <= 1e-12 * norm(s) * norm(c));
}

TEST_CASE("inner product rejects grid mismatch") {
    const auto a = PeriodicSignal::zeros(Grid(4, 1.0));
    const auto b = PeriodicSignal::zeros(Grid(4, 2.0));
    CHECK_THROWS_AS(inner_product(a, b), DimensionError);
    CHECK_THROWS_AS(a + b, DimensionError);
}

TEST_CASE("backward difference wraps around") {
    const Grid g(4, 1.0);
    const auto d = backward_difference(PeriodicSignal(g, {0, 1, 0, 1}));
    const std::vector<double> expected{-1, 1, -1, 1};
    for (std::size_t k = 0; k < 4; ++k) CHECK(d[k] == expected[k]);
}

TEST_CASE("backward difference of a constant vanishes") {
    const Grid g(200, 1e-4);
    const auto d = backward_difference(make_waveform(Constant{-0.005}, g));
    for (const double x : d.values()) CHECK(x == 0.0);
}

TEST_CASE("backward difference sums to zero") {
    const Grid g(7, 0.3);
    const auto d = backward_difference(PeriodicSignal(g, {3, -1, 4, 1, -5, 9, 2}));
    double sum = 0.0;
    for (const double x : d.values()) sum += x;
    CHECK_THAT(sum, WithinAbs(0.0, 1e-12));
}

TEST_CASE("rectifier excitations") {
    const Grid g(200, 1e-4);
    const auto vp = make_waveform(Sine{240.0, 50.0, 0.0}, g);
    CHECK_THAT(vp[50], WithinRel(240.0, 1e-14));
    CHECK_THAT(vp[150], WithinRel(-240.0, 1e-14));
    CHECK_THAT(vp[25], WithinRel(240.0 * std::sin(2 * std::numbers::pi * 50 * 25e-4), 1e-13));
    const auto iq = make_waveform(Constant{-0.005}, g);
    for (const double x : iq.values()) CHECK(x == -0.005);
}

TEST_CASE("tabulated waveform round-trips") {
    const Grid g(3, 0.5);
    const auto s = make_waveform(Tabulated{{1.5, -2.0, 0.25}}, g);
    CHECK(s[0] == 1.5);
    CHECK(s[1] == -2.0);
    CHECK(s[2] == 0.25);
    CHECK_THROWS_AS(make_waveform(Tabulated{{1.0}}, g), ConfigError);
}

TEST_CASE("non-commensurate sine is rejected") {
    const Grid g(200, 1e-4);
    CHECK_THROWS_AS(make_waveform(Sine{1.0, 60.0, 0.0}, g), ConfigError);
    CHECK_THROWS_AS(make_waveform(Sine{1.0, 0.0, 0.0}, g), ConfigError);
    CHECK_NOTHROW(make_waveform(Sine{1.0, 150.0, 0.0}, g));
}

TEST_CASE("bundle channels share the grid") {
    const Grid g(4, 1.0);
    const auto a = PeriodicSignal::constant(g, 1.0);
    const auto b = PeriodicSignal::constant(Grid(4, 2.0), 1.0);
    CHECK_THROWS_AS(SignalBundle::from_channels(g, {a, b}, {"a", "b"}), DimensionError);
    const auto bundle = SignalBundle::from_channels(g, {a, 2.0 * a}, {"a", "b"});
    CHECK(bundle.channels() == 2);
    CHECK(bundle.channel(1)[3] == 2.0);
    CHECK_THAT(norm(bundle), WithinRel(std::sqrt(4.0 + 16.0), 1e-14));
}
