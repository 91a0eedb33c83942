#pragma once

#include <stdexcept>
#include <string>

namespace oga {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data violates a documented precondition (bad label, zero-norm row, ...).
struct ValidationError : Error {
    using Error::Error;
};

// On-disk file does not match the declared format.
struct FormatError : Error {
    using Error::Error;
};

// Non-finite values or failed factorizations.
struct NumericsError : Error {
    using Error::Error;
};

// Covariance unusable for precision estimation (n < 2, zero trace, ...).
// Callers catch this and fall back to the identity precision.
struct DegenerateCovariance : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace oga
