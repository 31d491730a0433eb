#pragma once

// =============================================================================
// Discretized periodic signals on [0, T)
// =============================================================================
// A period is sampled at N points spaced dt apart. Signals carry their grid so
// that every binary operation can check compatibility. The inner product is
// the left-endpoint rule sum_k u(k) y(k) dt and the derivative is replaced by
// the periodic backward difference, which is a monotone circulant operator.
// =============================================================================

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pmono {

class Grid {
public:
    Grid(std::size_t samples, double dt);

    [[nodiscard]] std::size_t samples() const noexcept { return samples_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double period() const noexcept { return static_cast<double>(samples_) * dt_; }
    [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

    bool operator==(const Grid&) const = default;

private:
    std::size_t samples_;
    double dt_;
};

class PeriodicSignal {
public:
    PeriodicSignal(Grid grid, std::vector<double> values);

    static PeriodicSignal zeros(const Grid& grid);
    static PeriodicSignal constant(const Grid& grid, double level);

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t k) const { return values_[k]; }

private:
    Grid grid_;
    std::vector<double> values_;
};

PeriodicSignal operator+(const PeriodicSignal& a, const PeriodicSignal& b);
PeriodicSignal operator-(const PeriodicSignal& a, const PeriodicSignal& b);
PeriodicSignal operator*(double scale, const PeriodicSignal& a);

/// sum_k u(k) y(k) dt, accumulated in ascending k.
double inner_product(const PeriodicSignal& u, const PeriodicSignal& y);
double inner_product(std::span<const double> u, std::span<const double> y, double dt);

/// Discrete L2 norm, sqrt(<u, u>).
double norm(const PeriodicSignal& u);

/// out(k) = (u(k) - u(k-1 mod N)) / dt.
PeriodicSignal backward_difference(const PeriodicSignal& u);
void backward_difference(std::span<const double> u, double dt, std::span<double> out);

// -----------------------------------------------------------------------------
// Waveforms
// -----------------------------------------------------------------------------

struct Sine {
    double amplitude = 0.0;
    double frequency_hz = 0.0;
    double phase_rad = 0.0;
};

struct Constant {
    double level = 0.0;
};

struct Tabulated {
    std::vector<double> values;
};

using Waveform = std::variant<Sine, Constant, Tabulated>;

/// Samples the waveform at t = k dt. A sine must complete a whole number of
/// periods on the grid.
PeriodicSignal make_waveform(const Waveform& descriptor, const Grid& grid);

// -----------------------------------------------------------------------------
// Bundles of channels sharing a grid
// -----------------------------------------------------------------------------

/// Row-major so that each channel is contiguous.
using Samples = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class SignalBundle {
public:
    /// All-zero bundle with one channel per label.
    SignalBundle(Grid grid, std::vector<std::string> labels);
    SignalBundle(Grid grid, Samples data, std::vector<std::string> labels);

    static SignalBundle from_channels(const Grid& grid, const std::vector<PeriodicSignal>& channels,
                                      std::vector<std::string> labels);

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t channels() const noexcept { return labels_.size(); }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::string& label(std::size_t k) const { return labels_.at(k); }

    [[nodiscard]] const Samples& data() const noexcept { return data_; }
    [[nodiscard]] Samples& data() noexcept { return data_; }

    [[nodiscard]] std::span<const double> row(std::size_t k) const;
    [[nodiscard]] std::span<double> row(std::size_t k);
    [[nodiscard]] PeriodicSignal channel(std::size_t k) const;

private:
    Grid grid_;
    Samples data_;
    std::vector<std::string> labels_;
};

/// Sum of per-channel inner products.
double inner_product(const SignalBundle& a, const SignalBundle& b);
double norm(const SignalBundle& a);

}  // namespace pmono
