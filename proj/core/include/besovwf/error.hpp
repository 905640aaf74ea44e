#pragma once

#include <stdexcept>
#include <string>

namespace besovwf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The computation cannot produce a meaningful number (too few samples,
/// degenerate regression, non-finite data).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace besovwf
