#pragma once

#include <stdexcept>
#include <string>

namespace sramyield {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical or physical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Configuration object violates its invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (CSV / JSON).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Request falls outside a characterized or validated range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Sample statistics cannot define a distribution (zero variance, too few
/// samples).
class DegenerateStatistics : public Error {
public:
    using Error::Error;
};

/// An approximate closed form does not apply for this configuration.
class ModelInapplicable : public Error {
public:
    using Error::Error;
};

/// Quadrature or root finding did not reach the requested tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Parameter fit could not be started.
class FitError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sramyield
