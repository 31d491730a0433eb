#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmono {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes, grids or channel counts that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid user configuration (grids, waveforms, step sizes, law parameters).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A linear system that cannot be solved reliably.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Non-finite iterate encountered during an iterative solve.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : Error(what), iteration_(iteration) {}
    [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// No hybrid representation exists for the requested partition(s).
class RepresentationError : public Error {
public:
    using Error::Error;
};

/// Netlist text could not be parsed. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                message),
          line_(line),
          column_(column),
          message_(message) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

}  // namespace pmono
