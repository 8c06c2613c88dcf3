#pragma once

#include <stdexcept>
#include <string>

namespace oblique {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem too large for the configured caps, or a step size that breaks a
/// contraction requirement.
class SizingError : public Error {
public:
    using Error::Error;
};

/// An iterative solve did not converge within its iteration budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Input data violates a mathematical precondition (e.g. terminal value
/// outside the closed domain).
class DataError : public Error {
public:
    using Error::Error;
};

/// API misuse (wrong shapes, leaf node where an interior node is required).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Primary-loop enumeration refused because the mode grid exceeds the cap.
class CapExceededError : public Error {
public:
    using Error::Error;
};

/// Scenario / configuration problem detected before any solve.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace oblique
