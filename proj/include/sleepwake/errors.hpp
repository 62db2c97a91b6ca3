#pragma once

#include <stdexcept>
#include <string>

namespace sleepwake {

/// Base class for all domain errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A state or RHS evaluation produced NaN/Inf.
class NonFiniteStateError : public Error {
public:
    NonFiniteStateError(double t, int component, const std::string& name)
        : Error("non-finite value in component '" + name + "' (index " +
                std::to_string(component) + ") at t=" + std::to_string(t)),
          time(t), component_index(component) {}
    double time;
    int component_index;
};

/// Knockout factor outside [0, 1].
class InvalidFactorError : public Error {
public:
    explicit InvalidFactorError(double factor)
        : Error("knockout factor must lie in [0, 1], got " + std::to_string(factor)) {}
};

/// A perturbation event lies outside the simulated interval.
class ScheduleOutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Root bracketing failed: no nullcline intersection in the interval.
class NoRootInIntervalError : public Error {
public:
    using Error::Error;
};

/// Eigenvalue iteration failed to converge.
class ConvergenceFailureError : public Error {
public:
    using Error::Error;
};

/// Active sub-system block is not invertible.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// Not enough transition events for the requested statistic.
class InsufficientEventsError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (syntax).
class ParseError : public Error {
public:
    ParseError(const std::string& path, int line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_number(line) {}
    int line_number;
};

/// Well-formed input violating a semantic constraint.
class ValidationError : public Error {
public:
    ValidationError(const std::string& path, int line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_number(line) {}
    explicit ValidationError(const std::string& what) : Error(what), line_number(-1) {}
    int line_number;
};

/// Filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Plot kind does not match the supplied data.
class IncompatibleKindError : public Error {
public:
    using Error::Error;
};

}  // namespace sleepwake
