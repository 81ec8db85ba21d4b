#pragma once

#include <stdexcept>
#include <string>

namespace pincon {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (syntax or schema).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The graph has no root component (more than one source SCC).
class NoRootError : public Error {
public:
    using Error::Error;
};

/// Pinned vertex lies outside the root support (xi_r = 0).
class NotInRootError : public Error {
public:
    using Error::Error;
};

/// Null-space elimination residual exceeded tolerance.
class SingularSolveError : public Error {
public:
    using Error::Error;
};

/// More than one near-zero eigenvalue of the root-block form;
/// the classification is inconsistent with the spectrum.
class DegenerateGapError : public Error {
public:
    using Error::Error;
};

/// Iterative eigenvalue computation failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Weighted mean is zero where a gap rule divides by it.
class ZeroMeanError : public Error {
public:
    using Error::Error;
};

/// Nonpositive sampling step requested.
class StepSizeError : public Error {
public:
    using Error::Error;
};

/// Trajectory left the guarded region (|x|_inf > 1e12).
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Trajectory metadata does not match the graph/spectral data it is
/// being verified against.
class MismatchError : public Error {
public:
    using Error::Error;
};

} // namespace pincon
