#pragma once

#include <stdexcept>
#include <string>

namespace rchwave {

/// Base class of every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters outside the admissible region (c <= omega/2, omega <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A field expected to be even carries a significant odd component.
class SymmetryViolation : public Error {
public:
    using Error::Error;
};

/// The standing assumption c - phi > 0 fails somewhere on the grid.
class GapViolation : public Error {
public:
    using Error::Error;
};

/// Newton iteration did not reach the requested tolerance.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double c) : Error(what), c_(c) {}
    double c() const noexcept { return c_; }

private:
    double c_;
};

/// Newton iterate fell onto the trivial solution phi = 0.
class TrivialCollapse : public Error {
public:
    using Error::Error;
};

/// Continuation step halving went below the minimum step.
class StepUnderflow : public Error {
public:
    StepUnderflow(const std::string& what, double c) : Error(what), c_(c) {}
    double c() const noexcept { return c_; }

private:
    double c_;
};

/// Right-hand side not orthogonal to the supplied kernel.
class SolvabilityViolation : public Error {
public:
    using Error::Error;
};

/// Deflated operator is numerically singular (fold, z(L) = 2).
class NearSingular : public Error {
public:
    using Error::Error;
};

/// Adaptive ODE integration failed.
class IntegrationFailure : public Error {
public:
    using Error::Error;
};

/// The two independent routes to the Floquet constant disagree.
class InconsistentTheta : public Error {
public:
    using Error::Error;
};

/// Constrained eigenvalue count came out negative.
class NegativeCount : public Error {
public:
    using Error::Error;
};

/// Time integration produced an unbounded state.
class BlowupDetected : public Error {
public:
    using Error::Error;
};

}  // namespace rchwave
