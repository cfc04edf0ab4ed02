#pragma once

#include <stdexcept>
#include <string>

namespace metaaudit {

/// Input violates a documented precondition (bad value, malformed row, ...).
/// The CLI maps this family to exit status 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integer result does not fit in 64 bits.
class OverflowError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Confidence interval with zero width; no standard error can be recovered.
class DegenerateIntervalError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Too few observations for a diagnostic (KS, two-segment fit, ...).
class InsufficientDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// No records matched a requested endpoint.
class EmptySeriesError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// File could not be opened, read or written. CLI exit status 1.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace metaaudit
