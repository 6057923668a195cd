#pragma once

#include <stdexcept>
#include <string>

namespace serrin {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A spectrum or matrix left the ellipticity cone an operator needs.
class ConeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// (A, b, c) or a sub/supersolution parameter violates an admissibility bound.
class AdmissibilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Radial inner radius at or below the strict-convexity threshold r2.
class ConvexityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The dual decay exponent d_k^*(a) does not exceed 2.
class DecayConditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent file contents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A target point is not reached by the gradient image of a sampled function.
class ImageError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Newton line search exhausted its halvings without reducing the residual.
class StagnationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The continuation step shrank below its floor.
class ContinuationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Regression window too short or degenerate.
class WindowError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Recovered boundary mesh is not a closed sphere-like surface.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace serrin
