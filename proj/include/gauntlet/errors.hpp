/// @file errors.hpp
/// @brief Error taxonomy shared by all modules. The CLI maps these onto its
///        exit-code contract (0 ok, 2 no adversarial, 3 drift alerted, 4 bad input).
#pragma once

#include <stdexcept>
#include <string>

namespace gauntlet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No window pair fits into the stream; the stream is too short to attack or detect.
class EmptySchemeError : public Error {
public:
    using Error::Error;
};

/// The difference rows admit only constant solutions: every drift is visible.
class NoAdversarialError : public Error {
public:
    using Error::Error;
};

/// No non-constant binary vector with exact zero residual was found.
class BinarizationInfeasibleError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

/// A sampled function value left [0,1].
class RangeViolationError : public Error {
public:
    using Error::Error;
};

/// Too few quadrature panels for a discontinuous integrand.
class QuadratureUnstableError : public Error {
public:
    using Error::Error;
};

/// No head count makes the periodic-tail duty integral.
class NoFeasibleDutyError : public Error {
public:
    using Error::Error;
};

/// Balanced random heads need an even length.
class OddHeadError : public Error {
public:
    using Error::Error;
};

/// Malformed file or inline spec. Carries a 1-based line number when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, int line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class InvalidSpecError : public Error {
public:
    using Error::Error;
};

}  // namespace gauntlet
