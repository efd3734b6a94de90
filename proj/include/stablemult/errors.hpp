#pragma once

#include <stdexcept>
#include <string>

namespace stablemult {

// Argument outside the admissible domain (alpha range, s <= 0, bad k, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Field length or grid mismatch.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Spectrum that should be conjugate symmetric is not.
struct SymmetryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature did not reach the requested tolerance.
struct AccuracyError : std::runtime_error {
    AccuracyError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual estimate " + std::to_string(residual) + ")"),
          residual(residual) {}
    double residual;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

} // namespace stablemult
