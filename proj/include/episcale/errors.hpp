#pragma once

#include <stdexcept>
#include <string>

namespace episcale {

/// Invalid parameter or structural input. `field()` names the offending
/// parameter (e.g. "sigma_S", "movement.E") so callers can build paths.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)), detail_(message)
    {
    }

    const std::string& field() const noexcept { return field_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string field_;
    std::string detail_;
};

/// The requested analysis is not defined for this input (e.g. reduction with
/// Poisson incidence, dissipativity with unbounded recruitment).
class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The demographic equilibrium assumption fails: no unique positive
/// hyperbolic equilibrium of S -> sigma_S S + B(S) was found.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative numerical method failed to meet its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace episcale
