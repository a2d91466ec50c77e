#pragma once

#include <stdexcept>
#include <string>

namespace rdcircle {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input field contains NaN/Inf or is otherwise malformed.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

/// Two state vectors live on different grids.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

/// refine() asked to reduce resolution.
class UnsupportedCoarsenError : public Error {
public:
    using Error::Error;
};

/// Solution sup-norm exceeded the configured blow-up bound.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double last_valid_time, int last_valid_iterate = -1)
        : Error(what), last_valid_time(last_valid_time), last_valid_iterate(last_valid_iterate) {}
    double last_valid_time;
    int last_valid_iterate;  // set by iterate-level drivers, -1 otherwise
};

/// Field is numerically indistinguishable from zero; zero count undefined.
class DegenerateFunctionError : public Error {
public:
    using Error::Error;
};

/// Iterative solver failed to reach its tolerance.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// Krylov breakdown: DP - I (numerically) singular near a non-hyperbolic point.
class SingularJacobianError : public Error {
public:
    using Error::Error;
};

/// Operation requires a hyperbolic spectrum and at least one multiplier sits
/// within the margin of the unit circle.
class NonHyperbolicError : public Error {
public:
    using Error::Error;
};

/// Measured growth rate falls inside a ladder ambiguity band.
class UnclassifiableError : public Error {
public:
    using Error::Error;
};

/// An eigenvalue modulus collides with the requested spectral cut.
class GapViolationError : public Error {
public:
    using Error::Error;
};

/// A stated precondition fails (checked at runtime).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Expression parsing failure; position is a byte offset into the source.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what), position(position) {}
    std::size_t position;
};

}  // namespace rdcircle
