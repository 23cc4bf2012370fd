#pragma once

#include <stdexcept>
#include <string>

namespace ruin {

// Evaluation outside the domain of a Laplace transform or exponent.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Model or configuration rejected before any computation.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Root finding, eigen-structure or simulation failed to produce a usable number.
class NumericalError : public std::runtime_error {
public:
    enum class Kind { NoRoot, Singularity, Convergence, Consistency, EventCap };

    NumericalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ruin
