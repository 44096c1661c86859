#pragma once

#include <stdexcept>
#include <string>

namespace ganstab {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (non-convergence, singular system, NaN).
class NumericError : public Error {
public:
    using Error::Error;
};

/// An option combination the library does not implement.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace ganstab
