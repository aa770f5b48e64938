#pragma once

#include <stdexcept>
#include <string>

namespace nrange {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: wrong shape, ragged rows, non-finite entries, bad options.
class InputError : public Error {
public:
    using Error::Error;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

/// A documented precondition of an operation does not hold for the given data.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: non-convergence, loss of definiteness, unresolvable
/// branch matching, ill-conditioned fits.
class NumericError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefiniteError : public NumericError {
public:
    using NumericError::NumericError;
};

class GridTooCoarseError : public NumericError {
public:
    using NumericError::NumericError;
};

class UnsupportedExactOrderError : public NumericError {
public:
    using NumericError::NumericError;
};

class IllConditionedFitError : public NumericError {
public:
    using NumericError::NumericError;
};

class SearchFailureError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace nrange
