#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qstar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad argument, malformed input).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class NotPowerOfTwo : public Error {
public:
    using Error::Error;
};

/// Energy sits on a channel opening E = V_j where D becomes singular.
class ThresholdEnergy : public Error {
public:
    ThresholdEnergy(double energy, std::size_t line)
        : Error("energy " + std::to_string(energy) + " coincides with the threshold of line " +
                std::to_string(line + 1)),
          energy_(energy), line_(line) {}

    [[nodiscard]] double energy() const noexcept { return energy_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    double energy_;
    std::size_t line_;
};

class ClosedInputChannel : public Error {
public:
    using Error::Error;
};

class DegenerateParameters : public Error {
public:
    using Error::Error;
};

class BadShape : public Error {
public:
    using Error::Error;
};

class NoHalfCrossing : public Error {
public:
    using Error::Error;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

/// A connecting line of the delta web is at an internal resonance (sin denominator vanishes).
class ResonantLength : public Error {
public:
    ResonantLength(std::size_t j, std::size_t l, double energy)
        : Error("web link " + std::to_string(j + 1) + "-" + std::to_string(l + 1) +
                " is resonant at energy " + std::to_string(energy)),
          j_(j), l_(l), energy_(energy) {}

    [[nodiscard]] std::size_t first() const noexcept { return j_; }
    [[nodiscard]] std::size_t second() const noexcept { return l_; }
    [[nodiscard]] double energy() const noexcept { return energy_; }

private:
    std::size_t j_;
    std::size_t l_;
    double energy_;
};

}  // namespace qstar
