#include "pmono/signal.hpp"

#include "pmono/error.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace pmono {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) {
        throw DimensionError(std::string(what) + ": signals live on different grids");
    }
}

}  // namespace

Grid::Grid(std::size_t samples, double dt) : samples_(samples), dt_(dt) {
    if (samples < 2) {
        throw ConfigError("grid needs at least 2 samples, got " + std::to_string(samples));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("grid spacing must be positive and finite");
    }
}

PeriodicSignal::PeriodicSignal(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.samples()) {
        throw DimensionError("signal has " + std::to_string(values_.size()) +
                             " values but the grid has " + std::to_string(grid_.samples()) +
                             " samples");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) {
            throw ConfigError("signal value at sample " + std::to_string(k) + " is not finite");
        }
    }
}

PeriodicSignal PeriodicSignal::zeros(const Grid& grid) {
    return constant(grid, 0.0);
}

PeriodicSignal PeriodicSignal::constant(const Grid& grid, double level) {
    return PeriodicSignal(grid, std::vector<double>(grid.samples(), level));
}

PeriodicSignal operator+(const PeriodicSignal& a, const PeriodicSignal& b) {
    require_same_grid(a.grid(), b.grid(), "operator+");
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + b[k];
    return PeriodicSignal(a.grid(), std::move(out));
}

PeriodicSignal operator-(const PeriodicSignal& a, const PeriodicSignal& b) {
    require_same_grid(a.grid(), b.grid(), "operator-");
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] - b[k];
    return PeriodicSignal(a.grid(), std::move(out));
}

PeriodicSignal operator*(double scale, const PeriodicSignal& a) {
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = scale * a[k];
    return PeriodicSignal(a.grid(), std::move(out));
}

double inner_product(std::span<const double> u, std::span<const double> y, double dt) {
    if (u.size() != y.size()) {
        throw DimensionError("inner_product: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * y[k];
    return acc * dt;
}

double inner_product(const PeriodicSignal& u, const PeriodicSignal& y) {
    require_same_grid(u.grid(), y.grid(), "inner_product");
    return inner_product(u.values(), y.values(), u.grid().dt());
}

double norm(const PeriodicSignal& u) {
    return std::sqrt(inner_product(u, u));
}

void backward_difference(std::span<const double> u, double dt, std::span<double> out) {
    const std::size_t n = u.size();
    if (out.size() != n) {
        throw DimensionError("backward_difference: output length mismatch");
    }
    if (n == 0) return;
    const double prev_last = u[n - 1];
    for (std::size_t k = n - 1; k > 0; --k) out[k] = (u[k] - u[k - 1]) / dt;
    out[0] = (u[0] - prev_last) / dt;
}

PeriodicSignal backward_difference(const PeriodicSignal& u) {
    std::vector<double> out(u.size());
    backward_difference(u.values(), u.grid().dt(), out);
    return PeriodicSignal(u.grid(), std::move(out));
}

PeriodicSignal make_waveform(const Waveform& descriptor, const Grid& grid) {
    struct Visitor {
        const Grid& grid;

        PeriodicSignal operator()(const Sine& s) const {
            const double cycles = s.frequency_hz * grid.period();
            const double whole = std::round(cycles);
            if (!(whole >= 1.0) || std::abs(cycles - whole) > 1e-9 * std::max(1.0, cycles)) {
                throw ConfigError("sine at " + std::to_string(s.frequency_hz) +
                                  " Hz does not fit a whole number of periods in T = " +
                                  std::to_string(grid.period()) + " s");
            }
            // Use the integer cycle count so the samples wrap exactly.
            std::vector<double> v(grid.samples());
            const double n = static_cast<double>(grid.samples());
            for (std::size_t k = 0; k < v.size(); ++k) {
                const double arg = 2.0 * std::numbers::pi * whole * static_cast<double>(k) / n;
                v[k] = s.amplitude * std::sin(arg + s.phase_rad);
            }
            return PeriodicSignal(grid, std::move(v));
        }

        PeriodicSignal operator()(const Constant& c) const {
            return PeriodicSignal::constant(grid, c.level);
        }

        PeriodicSignal operator()(const Tabulated& t) const {
            if (t.values.size() != grid.samples()) {
                throw ConfigError("tabulated waveform has " + std::to_string(t.values.size()) +
                                  " values, grid has " + std::to_string(grid.samples()));
            }
            return PeriodicSignal(grid, t.values);
        }
    };
    return std::visit(Visitor{grid}, descriptor);
}

SignalBundle::SignalBundle(Grid grid, std::vector<std::string> labels)
    : grid_(grid),
      data_(Samples::Zero(static_cast<Eigen::Index>(labels.size()),
                          static_cast<Eigen::Index>(grid.samples()))),
      labels_(std::move(labels)) {}

SignalBundle::SignalBundle(Grid grid, Samples data, std::vector<std::string> labels)
    : grid_(grid), data_(std::move(data)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(data_.rows()) != labels_.size()) {
        throw DimensionError("bundle has " + std::to_string(data_.rows()) + " rows but " +
                             std::to_string(labels_.size()) + " labels");
    }
    if (static_cast<std::size_t>(data_.cols()) != grid_.samples()) {
        throw DimensionError("bundle rows do not match the grid length");
    }
}

SignalBundle SignalBundle::from_channels(const Grid& grid,
                                         const std::vector<PeriodicSignal>& channels,
                                         std::vector<std::string> labels) {
    if (channels.size() != labels.size()) {
        throw DimensionError("from_channels: channel and label counts differ");
    }
    SignalBundle out(grid, std::move(labels));
    for (std::size_t c = 0; c < channels.size(); ++c) {
        require_same_grid(grid, channels[c].grid(), "from_channels");
        auto dst = out.row(c);
        const auto src = channels[c].values();
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

std::span<const double> SignalBundle::row(std::size_t k) const {
    if (k >= channels()) throw DimensionError("bundle channel index out of range");
    return {data_.data() + k * grid_.samples(), grid_.samples()};
}

std::span<double> SignalBundle::row(std::size_t k) {
    if (k >= channels()) throw DimensionError("bundle channel index out of range");
    return {data_.data() + k * grid_.samples(), grid_.samples()};
}

PeriodicSignal SignalBundle::channel(std::size_t k) const {
    const auto r = row(k);
    return PeriodicSignal(grid_, std::vector<double>(r.begin(), r.end()));
}

double inner_product(const SignalBundle& a, const SignalBundle& b) {
    require_same_grid(a.grid(), b.grid(), "inner_product");
    if (a.channels() != b.channels()) {
        throw DimensionError("inner_product: bundles have different channel counts");
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        acc += inner_product(a.row(c), b.row(c), a.grid().dt());
    }
    return acc;
}

double norm(const SignalBundle& a) {
    return std::sqrt(inner_product(a, a));
}

}  // namespace pmono
