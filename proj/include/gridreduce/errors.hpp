#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace gridreduce {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument: wrong dimensions, nonpositive parameter, index out of range.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An SPD block failed to factor (disconnected graph or bad partition).
class RankDeficient : public Error {
public:
    using Error::Error;
};

/// Matrix handed to kron_edge_recovery is not a weighted Laplacian.
class NotLaplacian : public Error {
public:
    using Error::Error;
};

/// Angle differences reached the boundary of (-pi/2, pi/2)^m, or the load
/// Jacobian became singular. `time()` is NaN when no simulation time applies.
class RegularityLoss : public Error {
public:
    explicit RegularityLoss(const std::string& what, double time = std::numeric_limits<double>::quiet_NaN())
        : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Newton iteration failed to converge.
class NewtonDivergence : public Error {
public:
    using Error::Error;
};

/// Initial state violates the load constraint beyond tolerance.
class IncompatibleInitialCondition : public Error {
public:
    IncompatibleInitialCondition(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// State became NaN/inf during integration.
class NonFiniteState : public Error {
public:
    using Error::Error;
};

/// Scenario text is not well-formed.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, int line) : Error(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Scenario is well-formed but semantically invalid; `field()` is the dotted path.
class SemanticError : public Error {
public:
    SemanticError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gridreduce
